// dner — character-level disease-entity tagging toolkit.
//
// Subcommands cover the whole experiment loop: corpus preprocessing,
// training (neural tagger or sparse-feature baseline), prediction on raw
// text, chunk evaluation, seeded cross-validation with optional paired
// comparison, and synthetic corpus generation.  Exit codes: 0 ok, 2 usage,
// 3 data format, 4 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dner/baseline.hpp"
#include "dner/config.hpp"
#include "dner/corpus.hpp"
#include "dner/errors.hpp"
#include "dner/eval.hpp"
#include "dner/gazetteer.hpp"
#include "dner/model_io.hpp"
#include "dner/report.hpp"
#include "dner/synth.hpp"
#include "dner/tagger.hpp"
#include "dner/utf8.hpp"

namespace {

using namespace dner;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw DataError("short write to " + path);
}

// stdout when path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    spit(path, content);
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;  // key=value overrides, applied in order
};

RunConfig resolve_config(const ConfigArgs& args) {
  RunConfig cfg = args.path.empty() ? RunConfig{} : load_run_config(args.path);
  for (const std::string& kv : args.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    try {
      apply_config_entry(cfg, key, value);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

void add_config_opts(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "run configuration file");
  cmd->add_option("--set", args.sets,
                  "override one config key, e.g. --set epochs=5 (repeatable)");
}

std::vector<Document> load_labeled(const std::string& path) {
  ParseOptions opts;
  opts.require_tags = true;
  return parse_corpus_file(path, opts);
}

std::string loss_csv(const std::vector<double>& losses) {
  std::string out = "epoch,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, losses[i]);
    out += buf;
  }
  return out;
}

void log_losses(const std::vector<double>& losses) {
  for (std::size_t i = 0; i < losses.size(); ++i)
    std::printf("epoch %zu loss %.6f\n", i + 1, losses[i]);
}

// Annotated sentence from one raw line, for models without a raw-text
// convenience path.
Sentence sentence_from_text(const std::string& line, const Gazetteer* gaz) {
  std::u32string chars = decode_utf8(line);
  if (chars.empty()) throw DataError("cannot tag an empty sentence");
  Sentence s;
  s.records.reserve(chars.size());
  for (char32_t c : chars) {
    CharRecord r;
    r.ch = c;
    r.ctype = classify_char_type(c);
    s.records.push_back(r);
  }
  if (gaz) gaz->annotate(s);
  return s;
}

// Trains the configured system on `train` and scores it on a copy of `test`.
TrainEvalFn make_train_eval(const RunConfig& cfg) {
  return [cfg](const std::vector<Document>& train,
               const std::vector<Document>& test, int) {
    std::vector<Document> scored = test;
    if (cfg.model_kind == "tagger") {
      TrainResult r = train_tagger(cfg.tagger_config(), train);
      predict_tags(r.model, scored);
    } else {
      BaselineTrainResult r = train_baseline(cfg.baseline_config(), train);
      baseline_predict_tags(r.model, scored);
    }
    return evaluate_docs(scored);
  };
}

int cmd_preprocess(const std::string& in_path, const std::string& gaz_path,
                   const std::string& out_path) {
  std::vector<Document> docs = parse_corpus_file(in_path);
  if (!gaz_path.empty()) {
    Gazetteer gaz = Gazetteer::load_file(gaz_path);
    gaz.annotate(docs);
  } else {
    for (Document& d : docs)
      for (Sentence& s : d.sentences)
        for (CharRecord& r : s.records) r.icd.clear();
  }
  write_corpus_file(out_path, docs);
  return 0;
}

int cmd_train(const ConfigArgs& cfg_args, const std::string& corpus_path,
              const std::string& model_path, const std::string& loss_path) {
  RunConfig cfg = resolve_config(cfg_args);
  std::vector<Document> docs = load_labeled(corpus_path);
  std::vector<double> losses;
  if (cfg.model_kind == "tagger") {
    TrainResult r = train_tagger(cfg.tagger_config(), docs);
    losses = std::move(r.epoch_losses);
    save_model(r.model, model_path);
  } else {
    BaselineTrainResult r = train_baseline(cfg.baseline_config(), docs);
    losses = std::move(r.epoch_losses);
    save_model(r.model, model_path);
  }
  log_losses(losses);
  if (!loss_path.empty()) spit(loss_path, loss_csv(losses));
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in_path,
                const std::string& out_path, const std::string& gaz_path) {
  Gazetteer gaz;
  const Gazetteer* gaz_ptr = nullptr;
  if (!gaz_path.empty()) {
    gaz = Gazetteer::load_file(gaz_path);
    gaz_ptr = &gaz;
  }

  std::vector<std::string> lines;
  {
    std::istringstream in(slurp(in_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }

  Document doc;
  doc.doc_id = "input";
  switch (peek_model_kind(model_path)) {
    case ModelKind::kTagger: {
      TaggerModel m = load_tagger(model_path);
      for (const std::string& line : lines)
        doc.sentences.push_back(predict(m, line, gaz_ptr));
      break;
    }
    case ModelKind::kBaseline: {
      BaselineModel m = load_baseline(model_path);
      for (const std::string& line : lines) {
        Sentence s = sentence_from_text(line, gaz_ptr);
        baseline_predict_tags(m, s);
        doc.sentences.push_back(std::move(s));
      }
      break;
    }
  }

  std::vector<Document> docs;
  if (!doc.sentences.empty()) docs.push_back(std::move(doc));
  write_corpus_file(out_path, docs);
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             bool json, const std::string& out_path) {
  std::vector<Document> gold_docs = load_labeled(gold_path);
  std::vector<Document> pred_docs = parse_corpus_file(pred_path);

  bool any_preds = false;
  for (const Document& d : pred_docs)
    for (const Sentence& s : d.sentences) any_preds |= s.has_preds();
  std::vector<TagSeq> gold = gold_sequences(gold_docs);
  std::vector<TagSeq> pred =
      any_preds ? pred_sequences(pred_docs) : gold_sequences(pred_docs);

  EvalReport r = evaluate(gold, pred);
  emit(out_path, json ? report_json(r) : format_report(r));
  return 0;
}

int cmd_crossval(const ConfigArgs& cfg_args, const ConfigArgs& cmp_args,
                 const std::string& corpus_path, int k, int parallel, bool json,
                 bool micro, const std::string& out_path) {
  if (parallel < 1) throw UsageError("--parallel must be at least 1");
  RunConfig cfg = resolve_config(cfg_args);
  std::vector<Document> docs = load_labeled(corpus_path);

  FoldSummary a = crossval(make_train_eval(cfg), docs, k, cfg.seed, parallel);
  if (cmp_args.path.empty()) {
    std::string text = format_fold_summary(a);
    if (micro) text += "\npooled counts\n" + format_report(a.micro);
    emit(out_path, json ? fold_summary_json(a) : text);
    return 0;
  }

  // Same corpus, k and seed: the compared system sees identical folds.
  RunConfig cfg_b = resolve_config(cmp_args);
  FoldSummary b =
      crossval(make_train_eval(cfg_b), docs, k, cfg.seed, parallel);
  CompareResult c = compare_folds(std::move(a), std::move(b));
  std::string name_a = cfg_args.path.empty() ? "A" : cfg_args.path;
  std::string name_b = cmp_args.path.empty() ? "B" : cmp_args.path;
  emit(out_path,
       json ? compare_json(c, name_a, name_b) : format_compare(c, name_a, name_b));
  return 0;
}

int cmd_synth(std::uint64_t seed, int n_docs, const std::string& preset,
              const std::string& spec_path, const std::string& dump_path,
              const std::string& out_path, const std::string& gaz_path) {
  SynthSpec spec;
  if (!spec_path.empty()) {
    spec = SynthSpec::from_json_text(slurp(spec_path));
  } else if (preset == "standard") {
    spec = standard_synth_spec();
  } else if (preset == "adversarial") {
    spec = adversarial_synth_spec();
  } else {
    throw UsageError("unknown preset '" + preset +
                     "' (expected standard or adversarial)");
  }
  if (!dump_path.empty()) {
    emit(dump_path == "-" ? "" : dump_path, spec.to_json_text());
    return 0;
  }
  if (out_path.empty() || gaz_path.empty())
    throw UsageError("synth needs --out and --gazetteer-out");
  SynthResult r = generate_synthetic(seed, n_docs, spec);
  write_corpus_file(out_path, r.docs);
  spit(gaz_path, r.gazetteer.serialize());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-level disease named entity tagger"};
  app.require_subcommand(1);
  int exit_code = 0;

  // preprocess
  std::string pp_in, pp_gaz, pp_out;
  CLI::App* pp = app.add_subcommand(
      "preprocess", "attach char-type and dictionary-code columns");
  pp->add_option("--in", pp_in, "input column corpus")->required();
  pp->add_option("--gazetteer", pp_gaz, "SURFACE\\tCODE dictionary file");
  pp->add_option("--out", pp_out, "annotated output path")->required();
  pp->callback([&] { exit_code = cmd_preprocess(pp_in, pp_gaz, pp_out); });

  // train
  ConfigArgs tr_cfg;
  std::string tr_corpus, tr_model, tr_loss;
  CLI::App* tr = app.add_subcommand("train", "train a tagger or baseline");
  add_config_opts(tr, tr_cfg);
  tr->add_option("--corpus", tr_corpus, "labeled training corpus")->required();
  tr->add_option("--model", tr_model, "model output path")->required();
  tr->add_option("--loss-csv", tr_loss, "per-epoch loss CSV output");
  tr->callback(
      [&] { exit_code = cmd_train(tr_cfg, tr_corpus, tr_model, tr_loss); });

  // predict
  std::string pr_model, pr_in, pr_out, pr_gaz;
  CLI::App* pr =
      app.add_subcommand("predict", "tag raw text, one sentence per line");
  pr->add_option("--model", pr_model, "trained model file")->required();
  pr->add_option("--in", pr_in, "UTF-8 text input")->required();
  pr->add_option("--out", pr_out, "column output with predicted tags")
      ->required();
  pr->add_option("--gazetteer", pr_gaz, "dictionary for code features");
  pr->callback(
      [&] { exit_code = cmd_predict(pr_model, pr_in, pr_out, pr_gaz); });

  // eval
  std::string ev_gold, ev_pred, ev_out;
  bool ev_json = false;
  CLI::App* ev = app.add_subcommand("eval", "chunk precision/recall/F1");
  ev->add_option("--gold", ev_gold, "gold column corpus")->required();
  ev->add_option("--pred", ev_pred, "predictions (column corpus)")->required();
  ev->add_flag("--json", ev_json, "machine-readable output");
  ev->add_option("--out", ev_out, "report path (default stdout)");
  ev->callback(
      [&] { exit_code = cmd_eval(ev_gold, ev_pred, ev_json, ev_out); });

  // crossval / compare
  ConfigArgs cv_cfg, cv_cmp;
  std::string cv_corpus, cv_out;
  int cv_k = 10, cv_parallel = 1;
  bool cv_json = false, cv_micro = false;
  CLI::App* cv =
      app.add_subcommand("crossval", "k-fold cross-validation of one config");
  add_config_opts(cv, cv_cfg);
  cv->add_option("--corpus", cv_corpus, "labeled corpus")->required();
  cv->add_option("--k", cv_k, "fold count")->capture_default_str();
  cv->add_option("--parallel", cv_parallel, "max concurrent folds")
      ->capture_default_str();
  cv->add_option("--compare", cv_cmp.path,
                 "second config; runs both on identical folds with Welch's t");
  cv->add_flag("--json", cv_json, "machine-readable output");
  cv->add_flag("--micro", cv_micro, "also report pooled-count metrics");
  cv->add_option("--out", cv_out, "report path (default stdout)");
  cv->callback([&] {
    exit_code = cmd_crossval(cv_cfg, cv_cmp, cv_corpus, cv_k, cv_parallel,
                             cv_json, cv_micro, cv_out);
  });

  ConfigArgs cp_cfg, cp_cmp;
  std::string cp_corpus, cp_out;
  int cp_k = 10, cp_parallel = 1;
  bool cp_json = false;
  CLI::App* cp = app.add_subcommand(
      "compare", "cross-validate two configs on identical folds");
  cp->add_option("--config-a", cp_cfg.path, "first configuration")->required();
  cp->add_option("--config-b", cp_cmp.path, "second configuration")->required();
  cp->add_option("--set", cp_cfg.sets,
                 "override a key of config A (repeatable)");
  cp->add_option("--corpus", cp_corpus, "labeled corpus")->required();
  cp->add_option("--k", cp_k, "fold count")->capture_default_str();
  cp->add_option("--parallel", cp_parallel, "max concurrent folds")
      ->capture_default_str();
  cp->add_flag("--json", cp_json, "machine-readable output");
  cp->add_option("--out", cp_out, "report path (default stdout)");
  cp->callback([&] {
    exit_code = cmd_crossval(cp_cfg, cp_cmp, cp_corpus, cp_k, cp_parallel,
                             cp_json, false, cp_out);
  });

  // synth
  std::uint64_t sy_seed = 42;
  int sy_docs = 500;
  std::string sy_preset = "standard", sy_spec, sy_dump, sy_out, sy_gaz;
  CLI::App* sy = app.add_subcommand(
      "synth", "generate a synthetic labeled corpus plus gazetteer");
  sy->add_option("--seed", sy_seed, "generation seed")->capture_default_str();
  sy->add_option("--docs", sy_docs, "number of documents")
      ->capture_default_str();
  sy->add_option("--preset", sy_preset, "standard | adversarial")
      ->capture_default_str();
  sy->add_option("--spec", sy_spec, "JSON generation spec (overrides preset)");
  sy->add_option("--dump-spec", sy_dump,
                 "write the effective spec JSON here ('-' for stdout) and exit");
  sy->add_option("--out", sy_out, "corpus output path");
  sy->add_option("--gazetteer-out", sy_gaz, "gazetteer output path");
  sy->callback([&] {
    exit_code = cmd_synth(sy_seed, sy_docs, sy_preset, sy_spec, sy_dump,
                          sy_out, sy_gaz);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error:usage: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error:usage: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error:data: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error:numeric: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return 4;
  }
  return exit_code;
}
