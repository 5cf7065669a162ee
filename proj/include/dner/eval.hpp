#pragma once

// Chunk-level scoring of tagged sequences in the style of the CoNLL-2000
// shared-task scorer: entities are maximal chunks, a prediction counts only on
// an exact (start, end, type) match, and malformed sequences are still scored
// (an orphan I-X opens a chunk rather than raising an error).  Also houses
// k-fold cross-validation orchestration and Welch's t-test for comparing
// per-fold metric samples.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dner/corpus.hpp"
#include "dner/tags.hpp"

namespace dner {

struct Chunk {
  std::size_t start = 0;  // 1-based, inclusive
  std::size_t end = 0;    // 1-based, inclusive
  char type = '\0';       // 'P', 'N', or 'D' when modality is merged

  bool operator==(const Chunk&) const = default;
};

// Chunks in left-to-right order.  A chunk starts at B-X, or at an I-X whose
// predecessor is O, sequence start, or a different entity type; it extends
// through consecutive I-X of the same type.
std::vector<Chunk> extract_chunks(std::span<const Tag> tags);

// Same, but with P and N collapsed to a single type 'D' *before* chunk
// boundaries are determined (so B-P followed by I-N forms one chunk).
std::vector<Chunk> extract_chunks_merged(std::span<const Tag> tags);

// 1-based positions where an I-X tag is not preceded by B-X/I-X of the same
// type.  Empty result = valid IOB2.
std::vector<std::size_t> iob2_validate(std::span<const Tag> tags);

struct PrfEntry {
  std::size_t n_gold = 0;
  std::size_t n_pred = 0;
  std::size_t n_correct = 0;
  double precision = 0.0;  // percentages; zero denominator scores 0
  double recall = 0.0;
  double f1 = 0.0;
};

PrfEntry make_prf(std::size_t n_gold, std::size_t n_pred, std::size_t n_correct);

using TagSeq = std::vector<Tag>;

// Scores aligned per-sentence tag sequences.  type_filter restricts both gold
// and predicted chunks to one type ('P' or 'N'); nullopt scores every chunk
// (type must still match for a chunk to count as correct).
PrfEntry chunk_prf(std::span<const TagSeq> gold, std::span<const TagSeq> pred,
                   std::optional<char> type_filter = std::nullopt);

// Modality-blind entity extraction score: both sides relabeled to type 'D'
// before chunking.
PrfEntry merged_eval(std::span<const TagSeq> gold, std::span<const TagSeq> pred);

struct EvalReport {
  PrfEntry p_tag;    // positive-modality entities only
  PrfEntry n_tag;    // negative-modality entities only
  PrfEntry overall;  // both types, modality must match
  PrfEntry merged;   // modality merged before chunking
};

EvalReport evaluate(std::span<const TagSeq> gold, std::span<const TagSeq> pred);

// Gold tags from records' tag column, predicted from the pred column.
EvalReport evaluate_docs(std::span<const Document> docs);

std::vector<TagSeq> gold_sequences(std::span<const Document> docs);
std::vector<TagSeq> pred_sequences(std::span<const Document> docs);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
};

struct EntryStats {
  MetricStats precision, recall, f1;
};

struct FoldSummary {
  std::vector<EvalReport> folds;
  // Macro aggregation: mean and std of the per-fold metric values.
  EntryStats p_tag, n_tag, overall, merged;
  // Micro aggregation: metrics over counts pooled across folds.
  EvalReport micro;
  std::vector<int> empty_gold_folds;  // folds whose test set held no gold chunks
};

FoldSummary summarize_folds(std::vector<EvalReport> folds);

// Trains on `train`, evaluates on `test`, returns the fold's report.
using TrainEvalFn = std::function<EvalReport(
    const std::vector<Document>& train, const std::vector<Document>& test,
    int fold)>;

// Splits documents into k folds (seeded), runs train/eval per fold (up to
// `parallel` folds concurrently), and aggregates mean/std per metric.
// Deterministic for a fixed seed regardless of parallelism.
FoldSummary crossval(const TrainEvalFn& fn, std::span<const Document> docs,
                     int k, std::uint64_t seed, int parallel = 1);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool infinite_t = false;
};

// Two-sample t-test with unequal variances (Welch–Satterthwaite df).  Both
// samples need >= 2 values.  Degenerate cases: both variances zero with equal
// means -> t=0, p=1; with different means -> p=0 and infinite_t set.
WelchResult welch_t(std::span<const double> xs, std::span<const double> ys);

// I_x(a, b), computed by continued fraction to ~1e-12.  Exposed for testing.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace dner
