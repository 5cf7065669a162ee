// Release gate: ten numbered end-to-end checks, one per invocation under
// ctest (--criterion N) or all in sequence.  Each prints a single
// [PASS]/[FAIL] line; the process exits nonzero if any selected check fails.
//
//  1  CRF forward/viterbi against brute-force enumeration
//  2  autodiff gradients of every layer, the full tagger nll, the baseline nll
//  3  sum of path probabilities is exactly one
//  4  constrained decoding never emits an IOB2-invalid sequence
//  5  chunk scorer reproduces the frozen reference fixtures bit for bit
//  6  the tagger learns a held-out synthetic corpus to F >= 90
//  7  comparative orderings: neural beats sparse CRF on negation modality,
//     dictionary codes do not hurt entity extraction
//  8  end-to-end determinism and bit-exact model round trips
//  9  Welch's t against a high-precision oracle
// 10  Adam against hand-derived closed forms

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dner/adam.hpp"
#include "dner/baseline.hpp"
#include "dner/corpus.hpp"
#include "dner/crf.hpp"
#include "dner/errors.hpp"
#include "dner/eval.hpp"
#include "dner/graph.hpp"
#include "dner/layers.hpp"
#include "dner/model_io.hpp"
#include "dner/rng.hpp"
#include "dner/synth.hpp"
#include "dner/tagger.hpp"
#include "dner/tensor.hpp"

#include "brute_crf.hpp"

using namespace dner;
namespace fs = std::filesystem;

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw DataError("cannot write " + p.string());
}

struct TempDir {
  fs::path dir;
  explicit TempDir(const char* tag) {
    dir = fs::temp_directory_path() /
          (std::string("dner_accept_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path operator/(const char* name) const { return dir / name; }
};

// Runs the main binary; returns its exit code.
int run_cli(const TempDir& t, const std::string& args) {
  std::string cmd = std::string(DNER_BIN) + " " + args + " >" +
                    (t / "_stdout").string() + " 2>" + (t / "_stderr").string();
  int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

double hex_d(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// ---- criterion 1: CRF oracle equivalence -------------------------------

bool crit_forward_viterbi(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(901);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    ag::Index len = 1 + (i % 6);
    ag::Tensor em = brute::random_emissions(len, rng);
    crf::CrfParams p = brute::random_params(rng);
    brute::BruteResult br = brute::enumerate(em, p);

    double lz = crf::log_partition_value(em, p);
    worst = std::max(worst, std::abs(lz - br.log_z));
    crf::ViterbiResult v = crf::viterbi(em, p);
    worst = std::max(worst, std::abs(v.score - br.max_score));
    double attained = crf::sequence_score_value(em, p, v.tags);
    worst = std::max(worst, std::abs(attained - v.score));
  }
  double secs = elapsed_s(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "200 instances, max |dev| %.2e, %.1f s (limit 10)", worst, secs);
  detail = buf;
  return worst < 1e-9 && secs < 10.0;
}

// ---- criterion 2: gradient checks --------------------------------------

bool crit_gradients(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  auto check = [&worst](const ag::BuildFn& build,
                        std::span<ag::Tensor* const> params) {
    worst = std::max(worst, ag::check_gradient(build, params));
  };

  // Individual layers.
  {
    Rng rng(11);
    nn::EmbeddingTable emb = nn::EmbeddingTable::init(4, 3, rng);
    std::vector<ag::Tensor*> params{&emb.weights};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          (void)g;
          ag::Node* table = b.bind(emb.weights);
          return ag::sum(ag::tanh(ag::row(table, 2)));
        },
        params);
  }
  {
    Rng rng(12);
    nn::LinearParams lin = nn::LinearParams::init(3, 2, rng);
    ag::Tensor x = ag::Tensor::vector({0.3, -1.1, 0.8});
    std::vector<ag::Tensor*> params{&lin.W, &lin.b, &x};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          (void)g;
          nn::LinearNodes nodes = nn::bind_linear(b, lin);
          ag::Node* nx = b.bind(x);
          return ag::sum(ag::sigmoid(nn::linear(nodes, nx)));
        },
        params);
  }
  {
    Rng rng(13);
    nn::LstmParams lstm = nn::LstmParams::init(2, 3, rng);
    ag::Tensor x1 = ag::Tensor::vector({0.5, -0.5});
    ag::Tensor x2 = ag::Tensor::vector({-0.25, 1.0});
    std::vector<ag::Tensor*> params{&lstm.W, &lstm.U, &lstm.b, &x1, &x2};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          nn::LstmNodes nodes = nn::bind_lstm(b, lstm);
          ag::Node* nx1 = b.bind(x1);
          ag::Node* nx2 = b.bind(x2);
          ag::Node* h = g.constant(ag::Tensor::zeros({3}));
          ag::Node* c = g.constant(ag::Tensor::zeros({3}));
          auto [h1, c1] = nn::lstm_step(nodes, nx1, h, c);
          auto [h2, c2] = nn::lstm_step(nodes, nx2, h1, c1);
          (void)c2;
          return ag::sum(h2);
        },
        params);
  }
  {
    Rng rng(14);
    nn::LstmParams fwd = nn::LstmParams::init(2, 2, rng);
    nn::LstmParams bwd = nn::LstmParams::init(2, 2, rng);
    ag::Tensor x1 = ag::Tensor::vector({0.2, 0.7});
    ag::Tensor x2 = ag::Tensor::vector({-0.6, 0.1});
    ag::Tensor x3 = ag::Tensor::vector({0.9, -0.4});
    std::vector<ag::Tensor*> params{&fwd.W, &fwd.U, &fwd.b, &bwd.W,
                                    &bwd.U, &bwd.b, &x1,    &x2,
                                    &x3};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          (void)g;
          nn::LstmNodes nf = nn::bind_lstm(b, fwd);
          nn::LstmNodes nb = nn::bind_lstm(b, bwd);
          std::vector<ag::Node*> xs{b.bind(x1), b.bind(x2), b.bind(x3)};
          std::vector<ag::Node*> hs = nn::bilstm(nf, nb, xs);
          ag::Node* total = hs[0];
          for (std::size_t i = 1; i < hs.size(); ++i)
            total = ag::add(total, hs[i]);
          return ag::sum(total);
        },
        params);
  }
  {
    // Dropout: a fresh generator with a fixed seed inside the builder keeps
    // the mask identical across the finite-difference re-evaluations.
    ag::Tensor x = ag::Tensor::vector({0.4, -0.9, 1.3, 0.05});
    std::vector<ag::Tensor*> params{&x};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          (void)g;
          ag::Node* nx = b.bind(x);
          Rng mask_rng(99);
          return ag::sum(nn::dropout(nx, 0.4, mask_rng, true));
        },
        params);
  }
  {
    ag::Tensor v = ag::Tensor::vector({0.1, -2.0, 1.5, 0.7, -0.3});
    std::vector<ag::Tensor*> params{&v};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          (void)g;
          return ag::logsumexp(b.bind(v));
        },
        params);
  }

  // Full tagger nll on a 4-character sentence, char-only and all-features.
  {
    std::istringstream in(
        "#doc g\n"
        "肺\tJ18\tC\tB-P\n炎\tJ18\tC\tI-P\nな\t-\tH\tO\nし\t-\tH\tO\n\n");
    std::vector<Document> docs = parse_corpus(in);
    const Sentence& sent = docs[0].sentences[0];
    std::vector<Tag> gold = sent.tags();
    for (bool all_features : {false, true}) {
      TrainConfig cfg;
      cfg.dims = {4, 3, 2, 3};
      cfg.feat = {all_features, all_features};
      cfg.seed = 33;
      TaggerModel m = init_tagger(cfg, docs);
      std::vector<ag::Tensor*> params = m.parameters();
      check(
          [&](ag::Graph& g, ag::ParamBinder& b) {
            TaggerNodes nodes = bind_tagger(b, m);
            std::vector<ag::Node*> em = tagger_emissions(g, nodes, m, sent);
            return crf::nll(em, nodes.crf, gold);
          },
          params);
    }
  }

  // Baseline nll with randomized weights.
  {
    std::istringstream in(
        "#doc g\n"
        "胃\tC16\tC\tB-N\n癌\tC16\tC\tI-N\nな\t-\tH\tO\nし\t-\tH\tO\n\n");
    std::vector<Document> docs = parse_corpus(in);
    const Sentence& sent = docs[0].sentences[0];
    std::vector<Tag> gold = sent.tags();
    BaselineConfig bcfg;
    bcfg.tmpl = FeatureTemplate::kBigram;
    bcfg.epochs = 0;
    BaselineModel m = train_baseline(bcfg, docs).model;
    Rng rng(44);
    for (ag::Index i = 0; i < m.weights.size(); ++i)
      m.weights(i) = rng.uniform(-0.5, 0.5);
    for (ag::Index i = 0; i < m.crf.transitions.size(); ++i)
      m.crf.transitions(i) = rng.uniform(-0.5, 0.5);
    std::vector<ag::Tensor*> params{&m.weights, &m.crf.transitions,
                                    &m.crf.start, &m.crf.end};
    check(
        [&](ag::Graph& g, ag::ParamBinder& b) {
          ag::Node* w = b.bind(m.weights);
          crf::CrfNodes cn;
          cn.transitions = b.bind(m.crf.transitions);
          cn.start = b.bind(m.crf.start);
          cn.end = b.bind(m.crf.end);
          std::vector<ag::Node*> em = baseline_emissions(g, w, m, sent);
          return crf::nll(em, cn, gold);
        },
        params);
  }

  double secs = elapsed_s(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max relative error %.2e, %.1f s (limit 30)", worst, secs);
  detail = buf;
  return worst < 1e-6 && secs < 30.0;
}

// ---- criterion 3: normalization ----------------------------------------

bool crit_normalization(std::string& detail) {
  Rng rng(903);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    ag::Index len = 1 + (i % 5);
    ag::Tensor em = brute::random_emissions(len, rng);
    crf::CrfParams p = brute::random_params(rng);
    double lz = crf::log_partition_value(em, p);

    double total = 0.0;
    std::vector<int> path(static_cast<std::size_t>(len), 0);
    while (true) {
      total += std::exp(brute::path_score(em, p, path) - lz);
      std::size_t pos = 0;
      while (pos < path.size() && ++path[pos] == kNumTags) {
        path[pos] = 0;
        ++pos;
      }
      if (pos == path.size()) break;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "50 instances, max |sum-1| %.2e", worst);
  detail = buf;
  return worst <= 1e-9;
}

// ---- criterion 4: IOB2 validity under the mask -------------------------

bool crit_mask_validity(std::string& detail) {
  Rng rng(904);
  crf::ConstraintMask mask = crf::build_constraint_mask();
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    ag::Index len = 1 + static_cast<ag::Index>(rng.below(12));
    ag::Tensor em = brute::random_emissions(len, rng, 4.0);
    crf::CrfParams p = brute::random_params(rng, 3.0);
    crf::ViterbiResult v = crf::viterbi(em, p, &mask);
    if (!iob2_validate(v.tags).empty() || !crf::mask_allows(mask, v.tags))
      ++bad;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/1000 decodes violated IOB2", bad);
  detail = buf;
  return bad == 0;
}

// ---- criterion 5: reference scorer fixtures ----------------------------

bool crit_eval_fixtures(std::string& detail) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/eval_fixtures.json");
  nlohmann::json fixtures;
  in >> fixtures;
  auto to_seqs = [](const nlohmann::json& j) {
    std::vector<TagSeq> seqs;
    for (const auto& sent : j) {
      TagSeq seq;
      for (const auto& t : sent)
        seq.push_back(*parse_tag(t.get<std::string>()));
      seqs.push_back(std::move(seq));
    }
    return seqs;
  };
  int failures = 0;
  for (const auto& f : fixtures) {
    EvalReport got = evaluate(to_seqs(f.at("gold")), to_seqs(f.at("pred")));
    auto entry_ok = [&](const char* key, const PrfEntry& e) {
      const auto& want = f.at("expected").at(key);
      return e.n_gold == want.at("gold").get<std::size_t>() &&
             e.n_pred == want.at("pred").get<std::size_t>() &&
             e.n_correct == want.at("correct").get<std::size_t>() &&
             e.precision == hex_d(want.at("precision").get<std::string>()) &&
             e.recall == hex_d(want.at("recall").get<std::string>()) &&
             e.f1 == hex_d(want.at("f1").get<std::string>());
    };
    bool ok = entry_ok("p_tag", got.p_tag) && entry_ok("n_tag", got.n_tag) &&
              entry_ok("overall", got.overall) &&
              entry_ok("merged", got.merged);
    if (!ok) ++failures;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu fixtures, %d mismatched",
                fixtures.size(), failures);
  detail = buf;
  return failures == 0 && fixtures.size() == 50;
}

// ---- criterion 6: learnability at desk scale ---------------------------

bool crit_learnability(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  SynthResult sr = generate_synthetic(2026, 500, standard_synth_spec());

  std::vector<Document> train(sr.docs.begin(), sr.docs.begin() + 450);
  std::vector<Document> held(sr.docs.begin() + 450, sr.docs.end());

  TrainConfig cfg;  // dims default to 100/100/10/100
  cfg.epochs = 20;
  cfg.feat = {true, true};
  cfg.seed = 7;
  TrainResult r = train_tagger(cfg, train);
  predict_tags(r.model, held);
  EvalReport rep = evaluate_docs(held);

  double secs = elapsed_s(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "held-out entity F %.2f, P-tag F %.2f over %zu docs, "
                "%.0f s (limit 900)",
                rep.merged.f1, rep.p_tag.f1, held.size(), secs);
  detail = buf;
  return rep.merged.f1 >= 90.0 && rep.p_tag.f1 >= 90.0 && secs < 900.0;
}

// ---- criterion 7: comparative orderings --------------------------------

struct WelchRow {
  double mean_a = 0.0, mean_b = 0.0, p = 1.0;
  bool infinite_t = false;
};

WelchRow find_metric(const nlohmann::json& cmp, const std::string& name) {
  for (const auto& w : cmp.at("welch")) {
    if (w.at("metric").get<std::string>() != name) continue;
    WelchRow r;
    r.mean_a = w.at("mean_a").get<double>();
    r.mean_b = w.at("mean_b").get<double>();
    r.p = w.at("p").get<double>();
    r.infinite_t = w.at("infinite_t").get<bool>();
    return r;
  }
  throw DataError("metric not in compare output: " + name);
}

bool crit_orderings(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  TempDir t("order");
  if (run_cli(t, "synth --preset adversarial --seed 31 --docs 140 --out " +
                    (t / "c.txt").string() + " --gazetteer-out " +
                    (t / "g.txt").string()) != 0) {
    detail = "synth failed";
    return false;
  }

  const std::string neural =
      "model_kind = tagger\nepochs = 8\nminibatch_size = 10\n"
      "dropout_base = 0.5\nseed = 19\nchar_dim = 32\nicd_dim = 16\n"
      "ctype_dim = 4\nhidden_dim = 40\n";
  spit(t / "bilstm.conf", neural);
  spit(t / "bilstm_icd.conf", neural + "use_icd = true\n");
  const std::string sparse =
      "model_kind = baseline\nepochs = 12\nminibatch_size = 10\nseed = 19\n";
  spit(t / "crf_uni.conf", sparse + "template = unigram\n");
  spit(t / "crf_big.conf", sparse + "template = bigram\n");

  auto compare = [&](const char* a, const char* b, const char* out) {
    std::string cmd = "compare --config-a " + (t / a).string() +
                      " --config-b " + (t / b).string() + " --corpus " +
                      (t / "c.txt").string() + " --k 10 --json --out " +
                      (t / out).string();
    if (run_cli(t, cmd) != 0)
      throw DataError(std::string("compare run failed: ") + a + " vs " + b);
    return nlohmann::json::parse(slurp(t / out));
  };

  nlohmann::json r1 = compare("bilstm.conf", "crf_uni.conf", "r1.json");
  nlohmann::json r2 = compare("bilstm_icd.conf", "crf_big.conf", "r2.json");

  WelchRow n1 = find_metric(r1, "n_tag.f1");      // A bilstm, B crf_unigram
  WelchRow n2 = find_metric(r2, "n_tag.f1");      // A bilstm_icd, B crf_bigram
  WelchRow m1 = find_metric(r1, "merged.f1");
  WelchRow m2 = find_metric(r2, "merged.f1");

  bool uni_below = n1.mean_b < n1.mean_a;
  bool big_below = n2.mean_b < n1.mean_a;
  bool icd_holds = m2.mean_a >= m1.mean_a;
  bool significant = n1.infinite_t || n1.p < 0.05;

  double secs = elapsed_s(t0);
  char buf[260];
  std::snprintf(buf, sizeof buf,
                "N-tag F: crf_uni %.1f / crf_big %.1f < bilstm %.1f (p %.2g); "
                "entity F: bilstm %.1f <= bilstm_icd %.1f; %.0f s",
                n1.mean_b, n2.mean_b, n1.mean_a, n1.p, m1.mean_a, m2.mean_a,
                secs);
  detail = buf;
  return uni_below && big_below && icd_holds && significant && secs < 900.0;
}

// ---- criterion 8: determinism ------------------------------------------

bool crit_determinism(std::string& detail) {
  TempDir t("det");
  if (run_cli(t, "synth --seed 5 --docs 10 --out " + (t / "c.txt").string() +
                    " --gazetteer-out " + (t / "g.txt").string()) != 0) {
    detail = "synth failed";
    return false;
  }
  std::string base = "crossval --corpus " + (t / "c.txt").string() +
                     " --k 3 --set model_kind=baseline --set epochs=2 --json";
  for (const char* variant : {"a.json", "b.json"})
    if (run_cli(t, base + " --out " + (t / variant).string()) != 0) {
      detail = "crossval failed";
      return false;
    }
  if (run_cli(t, base + " --parallel 2 --out " + (t / "p.json").string()) != 0) {
    detail = "parallel crossval failed";
    return false;
  }
  bool reports_equal = slurp(t / "a.json") == slurp(t / "b.json") &&
                       slurp(t / "a.json") == slurp(t / "p.json");

  // Model round trips, both kinds.
  std::istringstream in(slurp(t / "c.txt"));
  ParseOptions opts;
  opts.require_tags = true;
  std::vector<Document> docs = parse_corpus(in, opts);

  TrainConfig tc;
  tc.dims = {8, 6, 4, 10};
  tc.feat = {true, true};
  tc.epochs = 2;
  tc.dropout_base = 0.0;
  tc.seed = 3;
  TaggerModel tm = train_tagger(tc, docs).model;
  save_model(tm, (t / "t.model").string());
  TaggerModel tm2 = load_tagger((t / "t.model").string());
  bool tagger_exact = serialize_model(tm) == serialize_model(tm2);
  auto pa = tm.parameters();
  auto pb = tm2.parameters();
  for (std::size_t i = 0; tagger_exact && i < pa.size(); ++i)
    tagger_exact = ag::bitwise_equal(*pa[i], *pb[i]);

  BaselineConfig bc;
  bc.epochs = 2;
  bc.seed = 3;
  BaselineModel bm = train_baseline(bc, docs).model;
  save_model(bm, (t / "b.model").string());
  BaselineModel bm2 = load_baseline((t / "b.model").string());
  bool baseline_exact = ag::bitwise_equal(bm.weights, bm2.weights) &&
                        ag::bitwise_equal(bm.crf.transitions,
                                          bm2.crf.transitions) &&
                        ag::bitwise_equal(bm.crf.start, bm2.crf.start) &&
                        ag::bitwise_equal(bm.crf.end, bm2.crf.end);

  detail = std::string("reports byte-identical: ") +
           (reports_equal ? "yes" : "NO") +
           ", tagger round trip exact: " + (tagger_exact ? "yes" : "NO") +
           ", baseline: " + (baseline_exact ? "yes" : "NO");
  return reports_equal && tagger_exact && baseline_exact;
}

// ---- criterion 9: Welch oracle -----------------------------------------

bool crit_welch(std::string& detail) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/welch_oracle.json");
  nlohmann::json pairs;
  in >> pairs;
  double worst = 0.0;
  for (const auto& f : pairs) {
    std::vector<double> xs, ys;
    for (const auto& v : f.at("xs")) xs.push_back(hex_d(v.get<std::string>()));
    for (const auto& v : f.at("ys")) ys.push_back(hex_d(v.get<std::string>()));
    WelchResult got = welch_t(xs, ys);
    worst = std::max(worst, rel_err(got.t, hex_d(f.at("t").get<std::string>())));
    worst =
        std::max(worst, rel_err(got.df, hex_d(f.at("df").get<std::string>())));
    worst = std::max(worst, rel_err(got.p, hex_d(f.at("p").get<std::string>())));
  }

  std::vector<double> same{1.25, -0.5, 3.75, 0.0};
  WelchResult id = welch_t(same, same);
  bool identical_exact = id.t == 0.0 && id.p == 1.0 && !id.infinite_t;

  char buf[128];
  std::snprintf(buf, sizeof buf,
                "%zu pairs, max rel err %.2e; identical samples exact: %s",
                pairs.size(), worst, identical_exact ? "yes" : "NO");
  detail = buf;
  return worst <= 1e-6 && identical_exact && pairs.size() == 20;
}

// ---- criterion 10: Adam closed forms -----------------------------------

bool crit_adam(std::string& detail) {
  nn::AdamHyper h;
  const double w0 = 0.25, g1 = 0.7, g2 = -1.3;
  ag::Tensor w = ag::Tensor::vector({w0});
  std::vector<ag::Tensor*> params{&w};
  nn::AdamState adam(h);

  std::vector<ag::Tensor> grads{ag::Tensor::vector({g1})};
  adam.step(params, grads);
  double m1 = (1.0 - h.beta1) * g1;
  double v1 = (1.0 - h.beta2) * g1 * g1;
  double w1 =
      w0 - h.alpha * (m1 / (1.0 - h.beta1)) /
               (std::sqrt(v1 / (1.0 - h.beta2)) + h.eps);
  double err1 = std::abs(w(0) - w1);

  grads[0] = ag::Tensor::vector({g2});
  adam.step(params, grads);
  double m2 = h.beta1 * m1 + (1.0 - h.beta1) * g2;
  double v2 = h.beta2 * v1 + (1.0 - h.beta2) * g2 * g2;
  double w2 =
      w1 - h.alpha * (m2 / (1.0 - h.beta1 * h.beta1)) /
               (std::sqrt(v2 / (1.0 - h.beta2 * h.beta2)) + h.eps);
  double err2 = std::abs(w(0) - w2);

  char buf[96];
  std::snprintf(buf, sizeof buf, "one-step |dev| %.2e, two-step |dev| %.2e",
                err1, err2);
  detail = buf;
  return err1 < 1e-12 && err2 < 1e-12;
}

struct Criterion {
  int number;
  const char* title;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "CRF matches brute-force enumeration", crit_forward_viterbi},
    {2, "gradients match finite differences", crit_gradients},
    {3, "path probabilities sum to one", crit_normalization},
    {4, "constrained decodes are IOB2-valid", crit_mask_validity},
    {5, "scorer reproduces reference fixtures", crit_eval_fixtures},
    {6, "tagger learns held-out synthetic corpus", crit_learnability},
    {7, "comparative orderings replicate", crit_orderings},
    {8, "determinism and model round trips", crit_determinism},
    {9, "Welch's t matches the oracle", crit_welch},
    {10, "Adam matches closed forms", crit_adam},
};

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (selected < 0 || selected > 10) {
    std::fprintf(stderr, "criterion number must be 1..10\n");
    return 2;
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (selected != 0 && c.number != selected) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.number,
                c.title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
