#include "dner/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "dner/errors.hpp"

namespace dner {

namespace {

std::vector<Chunk> extract_impl(std::span<const Tag> tags, bool merge) {
  auto type_of = [merge](Tag t) -> char {
    char ty = tag_entity_type(t);
    return (merge && ty != '\0') ? 'D' : ty;
  };
  std::vector<Chunk> chunks;
  std::size_t open_start = 0;
  char open_type = '\0';
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Tag t = tags[i];
    char ty = type_of(t);
    if (ty == '\0') {  // O
      if (open_type != '\0') chunks.push_back({open_start, i, open_type});
      open_type = '\0';
      continue;
    }
    bool starts = tag_is_begin(t) || open_type != ty;
    if (starts) {
      if (open_type != '\0') chunks.push_back({open_start, i, open_type});
      open_start = i + 1;
      open_type = ty;
    }
  }
  if (open_type != '\0') chunks.push_back({open_start, tags.size(), open_type});
  return chunks;
}

std::size_t count_matches(const std::vector<Chunk>& gold,
                          const std::vector<Chunk>& pred) {
  std::size_t n = 0, gi = 0;
  for (const Chunk& p : pred) {
    while (gi < gold.size() && gold[gi].start < p.start) ++gi;
    for (std::size_t j = gi; j < gold.size() && gold[j].start == p.start; ++j)
      if (gold[j] == p) {
        ++n;
        break;
      }
  }
  return n;
}

void filter_type(std::vector<Chunk>& chunks, char type) {
  std::erase_if(chunks, [type](const Chunk& c) { return c.type != type; });
}

PrfEntry score_sequences(std::span<const TagSeq> gold, std::span<const TagSeq> pred,
                         std::optional<char> type_filter, bool merge) {
  if (gold.size() != pred.size())
    throw DataError("evaluation: gold has " + std::to_string(gold.size()) +
                    " sentences, predictions " + std::to_string(pred.size()));
  std::size_t n_gold = 0, n_pred = 0, n_correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw DataError("evaluation: sentence " + std::to_string(s + 1) +
                      " length mismatch (gold " + std::to_string(gold[s].size()) +
                      ", predicted " + std::to_string(pred[s].size()) + ")");
    std::vector<Chunk> g = extract_impl(gold[s], merge);
    std::vector<Chunk> p = extract_impl(pred[s], merge);
    if (type_filter) {
      filter_type(g, *type_filter);
      filter_type(p, *type_filter);
    }
    n_gold += g.size();
    n_pred += p.size();
    n_correct += count_matches(g, p);
  }
  return make_prf(n_gold, n_pred, n_correct);
}

}  // namespace

std::vector<Chunk> extract_chunks(std::span<const Tag> tags) {
  return extract_impl(tags, false);
}

std::vector<Chunk> extract_chunks_merged(std::span<const Tag> tags) {
  return extract_impl(tags, true);
}

std::vector<std::size_t> iob2_validate(std::span<const Tag> tags) {
  std::vector<std::size_t> violations;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!tag_is_inside(tags[i])) continue;
    if (i == 0 || tag_entity_type(tags[i - 1]) != tag_entity_type(tags[i]))
      violations.push_back(i + 1);
  }
  return violations;
}

PrfEntry make_prf(std::size_t n_gold, std::size_t n_pred, std::size_t n_correct) {
  PrfEntry e;
  e.n_gold = n_gold;
  e.n_pred = n_pred;
  e.n_correct = n_correct;
  e.precision = n_pred == 0 ? 0.0 : 100.0 * static_cast<double>(n_correct) /
                                        static_cast<double>(n_pred);
  e.recall = n_gold == 0 ? 0.0 : 100.0 * static_cast<double>(n_correct) /
                                     static_cast<double>(n_gold);
  e.f1 = (e.precision + e.recall) > 0.0
             ? 2.0 * e.precision * e.recall / (e.precision + e.recall)
             : 0.0;
  return e;
}

PrfEntry chunk_prf(std::span<const TagSeq> gold, std::span<const TagSeq> pred,
                   std::optional<char> type_filter) {
  return score_sequences(gold, pred, type_filter, false);
}

PrfEntry merged_eval(std::span<const TagSeq> gold, std::span<const TagSeq> pred) {
  return score_sequences(gold, pred, std::nullopt, true);
}

EvalReport evaluate(std::span<const TagSeq> gold, std::span<const TagSeq> pred) {
  EvalReport r;
  r.p_tag = chunk_prf(gold, pred, 'P');
  r.n_tag = chunk_prf(gold, pred, 'N');
  r.overall = chunk_prf(gold, pred);
  r.merged = merged_eval(gold, pred);
  return r;
}

std::vector<TagSeq> gold_sequences(std::span<const Document> docs) {
  std::vector<TagSeq> out;
  for (const Document& d : docs)
    for (const Sentence& s : d.sentences) out.push_back(s.tags());
  return out;
}

std::vector<TagSeq> pred_sequences(std::span<const Document> docs) {
  std::vector<TagSeq> out;
  for (const Document& d : docs)
    for (const Sentence& s : d.sentences) out.push_back(s.pred_tags());
  return out;
}

EvalReport evaluate_docs(std::span<const Document> docs) {
  return evaluate(gold_sequences(docs), pred_sequences(docs));
}

namespace {

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return s;
}

EntryStats entry_stats(const std::vector<EvalReport>& folds,
                       PrfEntry EvalReport::*field) {
  std::vector<double> p, r, f;
  for (const EvalReport& rep : folds) {
    p.push_back((rep.*field).precision);
    r.push_back((rep.*field).recall);
    f.push_back((rep.*field).f1);
  }
  return {stats_of(p), stats_of(r), stats_of(f)};
}

PrfEntry pooled_entry(const std::vector<EvalReport>& folds,
                      PrfEntry EvalReport::*field) {
  std::size_t gold = 0, pred = 0, correct = 0;
  for (const EvalReport& rep : folds) {
    gold += (rep.*field).n_gold;
    pred += (rep.*field).n_pred;
    correct += (rep.*field).n_correct;
  }
  return make_prf(gold, pred, correct);
}

}  // namespace

FoldSummary summarize_folds(std::vector<EvalReport> folds) {
  FoldSummary s;
  for (int i = 0; i < static_cast<int>(folds.size()); ++i)
    if (folds[static_cast<std::size_t>(i)].overall.n_gold == 0)
      s.empty_gold_folds.push_back(i);
  s.p_tag = entry_stats(folds, &EvalReport::p_tag);
  s.n_tag = entry_stats(folds, &EvalReport::n_tag);
  s.overall = entry_stats(folds, &EvalReport::overall);
  s.merged = entry_stats(folds, &EvalReport::merged);
  s.micro.p_tag = pooled_entry(folds, &EvalReport::p_tag);
  s.micro.n_tag = pooled_entry(folds, &EvalReport::n_tag);
  s.micro.overall = pooled_entry(folds, &EvalReport::overall);
  s.micro.merged = pooled_entry(folds, &EvalReport::merged);
  s.folds = std::move(folds);
  return s;
}

FoldSummary crossval(const TrainEvalFn& fn, std::span<const Document> docs,
                     int k, std::uint64_t seed, int parallel) {
  if (parallel < 1) throw UsageError("crossval: parallel must be >= 1");
  std::vector<std::vector<std::size_t>> folds =
      split_folds(docs.size(), k, seed);
  std::vector<EvalReport> reports(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());

  auto run_fold = [&](std::size_t i) {
    try {
      std::vector<bool> in_test(docs.size(), false);
      for (std::size_t d : folds[i]) in_test[d] = true;
      std::vector<Document> train, test;
      for (std::size_t d = 0; d < docs.size(); ++d)
        (in_test[d] ? test : train).push_back(docs[d]);
      reports[i] = fn(train, test, static_cast<int>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (parallel == 1) {
    for (std::size_t i = 0; i < folds.size(); ++i) run_fold(i);
  } else {
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&]() {
      while (true) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= folds.size()) return;
          i = next++;
        }
        run_fold(i);
      }
    };
    std::vector<std::thread> threads;
    std::size_t n_threads = std::min<std::size_t>(
        static_cast<std::size_t>(parallel), folds.size());
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize_folds(std::move(reports));
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw NumericError("incomplete beta: parameters must be positive");
  if (x < 0.0 || x > 1.0)
    throw NumericError("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  // Continued fraction for I_x(a,b) (modified Lentz).
  auto betacf = [](double a_, double b_, double x_) {
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    constexpr int kMaxIter = 500;
    double qab = a_ + b_, qap = a_ + 1.0, qam = a_ - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x_ / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
      double m2 = 2.0 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < kTiny) d = kTiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta: continued fraction did not converge");
  };

  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                 a * std::log(x) + b * std::log1p(-x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

WelchResult welch_t(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw UsageError("welch_t: each sample needs at least 2 values");
  auto mean_var = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair<double, double>(mean, ss / static_cast<double>(v.size() - 1));
  };
  auto [mx, vx] = mean_var(xs);
  auto [my, vy] = mean_var(ys);
  double n1 = static_cast<double>(xs.size());
  double n2 = static_cast<double>(ys.size());

  WelchResult res;
  if (vx == 0.0 && vy == 0.0) {
    if (mx == my) {
      res.t = 0.0;
      res.df = n1 + n2 - 2.0;
      res.p = 1.0;
    } else {
      res.t = mx > my ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
      res.df = n1 + n2 - 2.0;
      res.p = 0.0;
      res.infinite_t = true;
    }
    return res;
  }
  double se2 = vx / n1 + vy / n2;
  res.t = (mx - my) / std::sqrt(se2);
  double d1 = vx / n1, d2 = vy / n2;
  res.df = se2 * se2 /
           (d1 * d1 / (n1 - 1.0) + d2 * d2 / (n2 - 1.0));
  if (res.t == 0.0) {
    res.p = 1.0;
    return res;
  }
  res.p = regularized_incomplete_beta(res.df / 2.0, 0.5,
                                      res.df / (res.df + res.t * res.t));
  return res;
}

}  // namespace dner
