#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "dner/corpus.hpp"
#include "dner/errors.hpp"
#include "dner/tagger.hpp"
#include "dner/utf8.hpp"

using namespace dner;

namespace {

std::vector<Document> parse_text(const std::string& text,
                                 const ParseOptions& opts = {}) {
  std::istringstream in(text);
  return parse_corpus(in, opts);
}

// Tiny fully-annotated corpus: positive, negative, and entity-free sentences.
// Each sentence appears twice so no character has frequency 1 (the rare-word
// UNK remapping would otherwise hide half the evidence from training).
std::vector<Document> toy_corpus() {
  std::string sent_a =
      "肺\tJ18\tC\tB-P\n炎\tJ18\tC\tI-P\nあ\t-\tH\tO\nり\t-\tH\tO\n"
      "。\t-\tA\tO\n\n";
  std::string sent_b =
      "肺\tJ18\tC\tB-N\n炎\tJ18\tC\tI-N\nな\t-\tH\tO\nし\t-\tH\tO\n"
      "。\t-\tA\tO\n\n";
  std::string sent_c =
      "元\t-\tC\tO\n気\t-\tC\tO\nで\t-\tH\tO\nす\t-\tH\tO\n。\t-\tA\tO\n\n";
  return parse_text("#doc t\n" + sent_a + sent_b + sent_c + sent_a + sent_b +
                    sent_c);
}

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.dims.char_dim = 16;
  cfg.dims.icd_dim = 8;
  cfg.dims.ctype_dim = 4;
  cfg.dims.hidden_dim = 16;
  cfg.epochs = 120;
  cfg.dropout_base = 0.0;
  cfg.adam.alpha = 0.01;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("vocabularies reserve unknown and count frequencies") {
  std::vector<Document> docs = toy_corpus();
  FeatureConfig feat;
  feat.use_icd = true;
  Vocabulary chars, icd;
  build_vocabularies(docs, feat, chars, icd);

  CHECK(chars.token(Vocabulary::kUnk) == Vocabulary::kUnkToken);
  CHECK(chars.freq(Vocabulary::kUnk) == 0);
  std::size_t hai = chars.lookup("肺");
  CHECK(hai != Vocabulary::kUnk);
  CHECK(chars.freq(hai) == 4);  // two sentences, twice each
  CHECK(chars.lookup("未") == Vocabulary::kUnk);
  // 肺炎あり。なし元気です = 11 distinct characters + UNK
  CHECK(chars.size() == 12);

  CHECK(icd.lookup("-") != Vocabulary::kUnk);
  CHECK(icd.lookup("J18") != Vocabulary::kUnk);
  CHECK(icd.size() == 3);  // UNK, "-", J18

  Vocabulary chars2, icd2;
  build_vocabularies(docs, FeatureConfig{}, chars2, icd2);
  CHECK(icd2.size() == 1);  // untouched without the dictionary feature

  std::vector<Document> empty;
  Vocabulary c3, i3;
  CHECK_THROWS_AS(build_vocabularies(empty, feat, c3, i3), DataError);
}

TEST_CASE("initialization is seed-deterministic") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.feat.use_icd = true;
  cfg.feat.use_ctype = true;
  TaggerModel a = init_tagger(cfg, docs);
  TaggerModel b = init_tagger(cfg, docs);
  auto pa = a.parameters();
  auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(ag::bitwise_equal(*pa[i], *pb[i]));

  cfg.seed = 43;
  TaggerModel c = init_tagger(cfg, docs);
  CHECK(!ag::bitwise_equal(a.char_emb.weights, c.char_emb.weights));

  CHECK(a.char_emb.vocab_size == 12);
  CHECK(a.icd_emb.vocab_size == 3);
  CHECK(a.ctype_emb.vocab_size == kNumCharTypes);
  CHECK(a.lstm_input_dim() == 16 + 8 + 4);
  CHECK(a.crf.transitions.flat().abs().maxCoeff() == 0.0);
}

TEST_CASE("emission shapes follow the sentence") {
  std::vector<Document> docs = toy_corpus();
  TaggerModel m = init_tagger(toy_config(), docs);
  const Sentence& s = docs[0].sentences[0];
  ag::Tensor e = tagger_emission_matrix(m, s);
  CHECK(e.rows() == static_cast<ag::Index>(s.size()));
  CHECK(e.cols() == kNumTags);
  CHECK(e.all_finite());
}

TEST_CASE("emissions at one end react to characters at the other") {
  std::vector<Document> docs = toy_corpus();
  TaggerModel m = init_tagger(toy_config(), docs);
  Sentence s = docs[0].sentences[0];  // 肺炎あり。
  Sentence t = s;
  t.records.back().ch = U'な';  // in-vocabulary swap of the final character
  ag::Tensor es = tagger_emission_matrix(m, s);
  ag::Tensor et = tagger_emission_matrix(m, t);
  bool first_row_differs = false;
  for (ag::Index k = 0; k < kNumTags; ++k)
    if (es(0, k) != et(0, k)) first_row_differs = true;
  CHECK(first_row_differs);
}

TEST_CASE("training memorizes a toy corpus") {
  std::vector<Document> docs = toy_corpus();
  TrainResult r = train_tagger(toy_config(), docs);
  REQUIRE(r.epoch_losses.size() == 120);
  CHECK(r.epoch_losses.back() < r.epoch_losses.front());
  std::vector<Document> test = docs;
  predict_tags(r.model, test);
  for (const Document& d : test)
    for (const Sentence& s : d.sentences) CHECK(s.pred_tags() == s.tags());
}

TEST_CASE("training is deterministic") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.epochs = 3;
  cfg.dropout_base = 0.5;
  TrainResult a = train_tagger(cfg, docs);
  TrainResult b = train_tagger(cfg, docs);
  CHECK(a.epoch_losses == b.epoch_losses);
  auto pa = a.model.parameters();
  auto pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(ag::bitwise_equal(*pa[i], *pb[i]));

  cfg.seed = 99;
  TrainResult c = train_tagger(cfg, docs);
  CHECK(a.epoch_losses != c.epoch_losses);
}

TEST_CASE("zero epochs returns the freshly initialized model") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.epochs = 0;
  TrainResult r = train_tagger(cfg, docs);
  CHECK(r.epoch_losses.empty());
  TaggerModel fresh = init_tagger(cfg, docs);
  auto pr = r.model.parameters();
  auto pf = fresh.parameters();
  for (std::size_t i = 0; i < pr.size(); ++i)
    CHECK(ag::bitwise_equal(*pr[i], *pf[i]));
}

TEST_CASE("training rejects bad inputs") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.epochs = -1;
  CHECK_THROWS_AS(train_tagger(cfg, docs), UsageError);
  cfg = toy_config();
  cfg.minibatch_size = 0;
  CHECK_THROWS_AS(train_tagger(cfg, docs), UsageError);

  std::vector<Document> empty;
  CHECK_THROWS_AS(train_tagger(toy_config(), empty), DataError);

  std::vector<Document> untagged = parse_text("#doc u\n肺\t-\tC\n\n");
  CHECK_THROWS_AS(train_tagger(toy_config(), untagged), DataError);

  ParseOptions lenient;
  lenient.strict_iob2 = false;
  std::vector<Document> illegal =
      parse_text("#doc i\n肺\t-\tC\tO\n炎\t-\tC\tI-P\n\n", lenient);
  CHECK_THROWS_AS(train_tagger(toy_config(), illegal), DataError);
}

TEST_CASE("training mode demands its random streams") {
  std::vector<Document> docs = toy_corpus();
  TaggerModel m = init_tagger(toy_config(), docs);
  ag::Graph g;
  ag::ParamBinder binder(g);
  TaggerNodes nodes = bind_tagger(binder, m);
  CHECK_THROWS_AS(tagger_emissions(g, nodes, m, docs[0].sentences[0], true,
                                   0.5, nullptr, nullptr),
                  UsageError);
  Sentence empty;
  CHECK_THROWS_AS(tagger_emissions(g, nodes, m, empty), DataError);
}

TEST_CASE("prediction covers out-of-vocabulary text") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.epochs = 2;
  TrainResult r = train_tagger(cfg, docs);
  Sentence s = predict(r.model, "qzX未知の字", nullptr);
  CHECK(s.size() == 7);
  CHECK(s.has_preds());
  crf::ConstraintMask mask = crf::build_constraint_mask();
  CHECK(crf::mask_allows(mask, s.pred_tags()));
  CHECK_THROWS_AS(predict(r.model, "", nullptr), DataError);
}

TEST_CASE("prediction consults the dictionary when given one") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.epochs = 2;
  cfg.feat.use_icd = true;
  TrainResult r = train_tagger(cfg, docs);
  Gazetteer gaz;
  gaz.add(U"肺炎", "J18");
  Sentence s = predict(r.model, "肺炎あり。", &gaz);
  CHECK(s.records[0].icd == "J18");
  CHECK(s.records[1].icd == "J18");
  CHECK(s.records[2].icd.empty());
  CHECK(s.has_preds());
}

TEST_CASE("full tagger gradients match finite differences") {
  std::vector<Document> docs = toy_corpus();
  TrainConfig cfg = toy_config();
  cfg.dims.char_dim = 4;
  cfg.dims.icd_dim = 3;
  cfg.dims.ctype_dim = 2;
  cfg.dims.hidden_dim = 3;
  cfg.feat.use_icd = true;
  cfg.feat.use_ctype = true;
  TaggerModel m = init_tagger(cfg, docs);
  const Sentence& s = docs[0].sentences[0];
  std::vector<Tag> gold = s.tags();

  auto build = [&](ag::Graph& g, ag::ParamBinder& binder) -> ag::Node* {
    TaggerNodes nodes = bind_tagger(binder, m);
    std::vector<ag::Node*> emissions = tagger_emissions(g, nodes, m, s);
    return crf::nll(emissions, nodes.crf, gold);
  };
  CHECK(ag::check_gradient(build, m.parameters()) < 1e-6);
}
