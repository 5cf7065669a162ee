#pragma once

// Text tables and machine-readable dumps for evaluation results: single
// reports, cross-validation summaries (mean and sample std per metric), and
// two-system comparisons with a Welch's t-test per metric.

#include <string>
#include <vector>

#include "dner/eval.hpp"

namespace dner {

struct MetricComparison {
  std::string metric;  // e.g. "n_tag.f1"
  double mean_a = 0.0, mean_b = 0.0;
  WelchResult welch;
};

struct CompareResult {
  FoldSummary a, b;
  std::vector<MetricComparison> metrics;  // all entries x precision/recall/f1
};

// Welch's t-test on the per-fold samples of every metric. Both summaries must
// hold the same number of folds (>= 2).
CompareResult compare_folds(FoldSummary a, FoldSummary b);

std::string format_report(const EvalReport& r);
std::string format_fold_summary(const FoldSummary& s);
std::string format_compare(const CompareResult& c, const std::string& name_a,
                           const std::string& name_b);

std::string report_json(const EvalReport& r);
std::string fold_summary_json(const FoldSummary& s);
std::string compare_json(const CompareResult& c, const std::string& name_a,
                         const std::string& name_b);

}  // namespace dner
