#include "dner/report.hpp"

#include <cstdarg>
#include <cstdio>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "dner/errors.hpp"

namespace dner {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::pair<const char*, PrfEntry EvalReport::*> kEntries[] = {
    {"p_tag", &EvalReport::p_tag},
    {"n_tag", &EvalReport::n_tag},
    {"overall", &EvalReport::overall},
    {"merged", &EvalReport::merged},
};

constexpr std::pair<const char*, EntryStats FoldSummary::*> kStatEntries[] = {
    {"p_tag", &FoldSummary::p_tag},
    {"n_tag", &FoldSummary::n_tag},
    {"overall", &FoldSummary::overall},
    {"merged", &FoldSummary::merged},
};

constexpr std::pair<const char*, MetricStats EntryStats::*> kMetrics[] = {
    {"precision", &EntryStats::precision},
    {"recall", &EntryStats::recall},
    {"f1", &EntryStats::f1},
};

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

const char* row_label(const char* key) {
  if (std::string_view(key) == "p_tag") return "P-tag";
  if (std::string_view(key) == "n_tag") return "N-tag";
  if (std::string_view(key) == "overall") return "all";
  return "merged";
}

ordered_json entry_json(const PrfEntry& e) {
  ordered_json j;
  j["gold"] = e.n_gold;
  j["pred"] = e.n_pred;
  j["correct"] = e.n_correct;
  j["precision"] = e.precision;
  j["recall"] = e.recall;
  j["f1"] = e.f1;
  return j;
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  for (const auto& [key, member] : kEntries) j[key] = entry_json(r.*member);
  return j;
}

ordered_json stats_to_json(const EntryStats& s) {
  ordered_json j;
  for (const auto& [key, member] : kMetrics) {
    const MetricStats& m = s.*member;
    j[key] = {{"mean", m.mean}, {"stddev", m.stddev}};
  }
  return j;
}

ordered_json summary_to_json(const FoldSummary& s) {
  ordered_json j;
  j["n_folds"] = s.folds.size();
  ordered_json folds = ordered_json::array();
  for (const EvalReport& r : s.folds) folds.push_back(report_to_json(r));
  j["folds"] = std::move(folds);
  ordered_json stats;
  for (const auto& [key, member] : kStatEntries)
    stats[key] = stats_to_json(s.*member);
  j["summary"] = std::move(stats);
  j["micro"] = report_to_json(s.micro);
  j["empty_gold_folds"] = s.empty_gold_folds;
  return j;
}

// Per-fold samples of one metric, e.g. all p_tag precisions.
std::vector<double> metric_samples(const FoldSummary& s,
                                   PrfEntry EvalReport::*entry,
                                   double PrfEntry::*metric) {
  std::vector<double> xs;
  xs.reserve(s.folds.size());
  for (const EvalReport& r : s.folds) xs.push_back(r.*entry.*metric);
  return xs;
}

}  // namespace

CompareResult compare_folds(FoldSummary a, FoldSummary b) {
  if (a.folds.size() != b.folds.size())
    throw UsageError("compared runs hold different fold counts");
  if (a.folds.size() < 2)
    throw UsageError("comparison needs at least 2 folds");
  CompareResult c;
  c.a = std::move(a);
  c.b = std::move(b);
  constexpr std::pair<const char*, double PrfEntry::*> kPrf[] = {
      {"precision", &PrfEntry::precision},
      {"recall", &PrfEntry::recall},
      {"f1", &PrfEntry::f1},
  };
  for (const auto& [ekey, entry] : kEntries) {
    for (const auto& [mkey, metric] : kPrf) {
      MetricComparison mc;
      mc.metric = std::string(ekey) + "." + mkey;
      const auto xs = metric_samples(c.a, entry, metric);
      const auto ys = metric_samples(c.b, entry, metric);
      double sx = 0.0, sy = 0.0;
      for (double v : xs) sx += v;
      for (double v : ys) sy += v;
      mc.mean_a = sx / static_cast<double>(xs.size());
      mc.mean_b = sy / static_cast<double>(ys.size());
      mc.welch = welch_t(xs, ys);
      c.metrics.push_back(std::move(mc));
    }
  }
  return c;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  out += fmt("%-8s %10s %10s %10s %7s %7s %7s\n", "", "Precision", "Recall",
             "F1", "gold", "pred", "corr");
  for (const auto& [key, member] : kEntries) {
    const PrfEntry& e = r.*member;
    out += fmt("%-8s %10.2f %10.2f %10.2f %7zu %7zu %7zu\n", row_label(key),
               e.precision, e.recall, e.f1, e.n_gold, e.n_pred, e.n_correct);
  }
  return out;
}

std::string format_fold_summary(const FoldSummary& s) {
  std::string out = fmt("%zu folds\n", s.folds.size());
  out += fmt("%-8s %16s %16s %16s\n", "", "Precision", "Recall", "F1");
  for (const auto& [key, member] : kStatEntries) {
    const EntryStats& e = s.*member;
    out += fmt("%-8s %9.2f ±%-5.2f %9.2f ±%-5.2f %9.2f ±%-5.2f\n",
               row_label(key), e.precision.mean, e.precision.stddev,
               e.recall.mean, e.recall.stddev, e.f1.mean, e.f1.stddev);
  }
  if (!s.empty_gold_folds.empty()) {
    out += "warning: no gold chunks in fold";
    for (int f : s.empty_gold_folds) out += fmt(" %d", f);
    out += "\n";
  }
  return out;
}

std::string format_compare(const CompareResult& c, const std::string& name_a,
                           const std::string& name_b) {
  std::string out;
  out += fmt("A = %s\n", name_a.c_str());
  out += format_fold_summary(c.a);
  out += fmt("\nB = %s\n", name_b.c_str());
  out += format_fold_summary(c.b);
  out += fmt("\n%-18s %10s %10s %9s %8s %10s\n", "metric", "mean A", "mean B",
             "t", "df", "p");
  for (const MetricComparison& m : c.metrics) {
    if (m.welch.infinite_t) {
      out += fmt("%-18s %10.2f %10.2f %9s %8s %10.4g\n", m.metric.c_str(),
                 m.mean_a, m.mean_b, "inf", "-", m.welch.p);
    } else {
      out += fmt("%-18s %10.2f %10.2f %9.3f %8.2f %10.4g\n", m.metric.c_str(),
                 m.mean_a, m.mean_b, m.welch.t, m.welch.df, m.welch.p);
    }
  }
  return out;
}

std::string report_json(const EvalReport& r) {
  return report_to_json(r).dump(1) + "\n";
}

std::string fold_summary_json(const FoldSummary& s) {
  return summary_to_json(s).dump(1) + "\n";
}

std::string compare_json(const CompareResult& c, const std::string& name_a,
                         const std::string& name_b) {
  ordered_json j;
  j["a"] = {{"name", name_a}, {"runs", summary_to_json(c.a)}};
  j["b"] = {{"name", name_b}, {"runs", summary_to_json(c.b)}};
  ordered_json welch = ordered_json::array();
  for (const MetricComparison& m : c.metrics) {
    ordered_json w;
    w["metric"] = m.metric;
    w["mean_a"] = m.mean_a;
    w["mean_b"] = m.mean_b;
    w["t"] = m.welch.infinite_t ? ordered_json() : ordered_json(m.welch.t);
    w["df"] = m.welch.df;
    w["p"] = m.welch.p;
    w["infinite_t"] = m.welch.infinite_t;
    welch.push_back(std::move(w));
  }
  j["welch"] = std::move(welch);
  return j.dump(1) + "\n";
}

}  // namespace dner
