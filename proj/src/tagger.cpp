#include "dner/tagger.hpp"

#include <cmath>
#include <numeric>

#include "dner/errors.hpp"
#include "dner/utf8.hpp"

namespace dner {

ag::Index TaggerModel::lstm_input_dim() const {
  return dims.char_dim + (feat.use_icd ? dims.icd_dim : ag::Index{0}) +
         (feat.use_ctype ? dims.ctype_dim : ag::Index{0});
}

std::vector<ag::Tensor*> TaggerModel::parameters() {
  std::vector<ag::Tensor*> ps;
  ps.push_back(&char_emb.weights);
  if (feat.use_icd) ps.push_back(&icd_emb.weights);
  if (feat.use_ctype) ps.push_back(&ctype_emb.weights);
  for (nn::LstmParams* l : {&fwd, &bwd}) {
    ps.push_back(&l->W);
    ps.push_back(&l->U);
    ps.push_back(&l->b);
  }
  ps.push_back(&out.W);
  ps.push_back(&out.b);
  ps.push_back(&crf.transitions);
  ps.push_back(&crf.start);
  ps.push_back(&crf.end);
  return ps;
}

void build_vocabularies(std::span<const Document> docs,
                        const FeatureConfig& feat, Vocabulary& chars,
                        Vocabulary& icd) {
  std::size_t n_chars = 0;
  if (feat.use_icd) icd.add("-");
  for (const Document& d : docs) {
    for (const Sentence& s : d.sentences) {
      for (const CharRecord& r : s.records) {
        chars.add(encode_utf8(r.ch));
        if (feat.use_icd) icd.add(r.icd.empty() ? "-" : r.icd);
        ++n_chars;
      }
    }
  }
  if (n_chars == 0) throw DataError("vocabulary build: empty corpus");
}

TaggerModel init_tagger(const TrainConfig& cfg, std::span<const Document> docs) {
  TaggerModel m;
  m.feat = cfg.feat;
  m.dims = cfg.dims;
  build_vocabularies(docs, cfg.feat, m.char_vocab, m.icd_vocab);
  Rng rng = Rng::derive(cfg.seed, "init");
  m.char_emb = nn::EmbeddingTable::init(
      static_cast<ag::Index>(m.char_vocab.size()), m.dims.char_dim, rng);
  if (m.feat.use_icd)
    m.icd_emb = nn::EmbeddingTable::init(
        static_cast<ag::Index>(m.icd_vocab.size()), m.dims.icd_dim, rng);
  if (m.feat.use_ctype)
    m.ctype_emb = nn::EmbeddingTable::init(kNumCharTypes, m.dims.ctype_dim, rng);
  m.fwd = nn::LstmParams::init(m.lstm_input_dim(), m.dims.hidden_dim, rng);
  m.bwd = nn::LstmParams::init(m.lstm_input_dim(), m.dims.hidden_dim, rng);
  m.out = nn::LinearParams::init(2 * m.dims.hidden_dim, kNumTags, rng);
  m.crf = crf::CrfParams::zeros();
  return m;
}

TaggerNodes bind_tagger(ag::ParamBinder& binder, TaggerModel& m) {
  TaggerNodes n;
  n.char_emb = binder.bind(m.char_emb.weights);
  if (m.feat.use_icd) n.icd_emb = binder.bind(m.icd_emb.weights);
  if (m.feat.use_ctype) n.ctype_emb = binder.bind(m.ctype_emb.weights);
  n.fwd = nn::bind_lstm(binder, m.fwd);
  n.bwd = nn::bind_lstm(binder, m.bwd);
  n.out = nn::bind_linear(binder, m.out);
  n.crf = crf::bind_crf(binder, m.crf);
  return n;
}

namespace {

// Read-only binding for inference: parameters enter as constants.
TaggerNodes constant_tagger(ag::Graph& g, const TaggerModel& m) {
  TaggerNodes n;
  n.char_emb = g.constant(m.char_emb.weights);
  if (m.feat.use_icd) n.icd_emb = g.constant(m.icd_emb.weights);
  if (m.feat.use_ctype) n.ctype_emb = g.constant(m.ctype_emb.weights);
  n.fwd = {g.constant(m.fwd.W), g.constant(m.fwd.U), g.constant(m.fwd.b),
           m.fwd.hidden_dim};
  n.bwd = {g.constant(m.bwd.W), g.constant(m.bwd.U), g.constant(m.bwd.b),
           m.bwd.hidden_dim};
  n.out = {g.constant(m.out.W), g.constant(m.out.b)};
  n.crf = {g.constant(m.crf.transitions), g.constant(m.crf.start),
           g.constant(m.crf.end)};
  return n;
}

std::vector<Tag> checked_gold(const Sentence& s, const crf::ConstraintMask& mask) {
  std::vector<Tag> gold = s.tags();
  if (!crf::mask_allows(mask, gold)) {
    std::string names;
    for (Tag t : gold) {
      if (!names.empty()) names += ' ';
      names += tag_name(t);
    }
    throw DataError("training: gold tags violate the tagging scheme: " + names);
  }
  return gold;
}

}  // namespace

std::vector<ag::Node*> tagger_emissions(ag::Graph& g, const TaggerNodes& nodes,
                                        const TaggerModel& m, const Sentence& s,
                                        bool training, double dropout_rate,
                                        Rng* dropout_rng, Rng* oov_rng) {
  if (s.records.empty()) throw DataError("tagger: empty sentence");
  if (training && (dropout_rng == nullptr || oov_rng == nullptr))
    throw UsageError("tagger: training mode needs dropout and oov generators");
  (void)g;
  std::vector<ag::Node*> xs;
  xs.reserve(s.records.size());
  for (const CharRecord& r : s.records) {
    std::size_t idx = m.char_vocab.lookup(encode_utf8(r.ch));
    if (training && idx != Vocabulary::kUnk && m.char_vocab.freq(idx) == 1 &&
        oov_rng->uniform() < 0.5)
      idx = Vocabulary::kUnk;
    std::vector<ag::Node*> parts;
    parts.push_back(nn::embed(nodes.char_emb, static_cast<ag::Index>(idx)));
    if (m.feat.use_icd) {
      std::size_t ci = m.icd_vocab.lookup(r.icd.empty() ? "-" : r.icd);
      parts.push_back(nn::embed(nodes.icd_emb, static_cast<ag::Index>(ci)));
    }
    if (m.feat.use_ctype)
      parts.push_back(
          nn::embed(nodes.ctype_emb, static_cast<ag::Index>(r.ctype)));
    ag::Node* x = parts.size() == 1 ? parts[0] : ag::concat(parts);
    if (training) x = nn::dropout(x, dropout_rate, *dropout_rng, true);
    xs.push_back(x);
  }
  std::vector<ag::Node*> hs = nn::bilstm(nodes.fwd, nodes.bwd, xs);
  std::vector<ag::Node*> emissions;
  emissions.reserve(hs.size());
  for (ag::Node* h : hs) {
    if (training) h = nn::dropout(h, dropout_rate, *dropout_rng, true);
    emissions.push_back(nn::linear(nodes.out, h));
  }
  return emissions;
}

TrainResult train_tagger(const TrainConfig& cfg, std::span<const Document> docs) {
  if (cfg.epochs < 0) throw UsageError("training: negative epoch count");
  if (cfg.minibatch_size < 1)
    throw UsageError("training: minibatch_size must be >= 1");
  crf::ConstraintMask mask = crf::build_constraint_mask();

  std::vector<const Sentence*> sents;
  for (const Document& d : docs)
    for (const Sentence& s : d.sentences) sents.push_back(&s);
  if (sents.empty()) throw DataError("training: corpus has no sentences");
  std::vector<std::vector<Tag>> golds;
  golds.reserve(sents.size());
  for (const Sentence* s : sents) {
    if (!s->has_tags()) throw DataError("training: corpus has untagged sentences");
    golds.push_back(checked_gold(*s, mask));
  }

  TrainResult res{init_tagger(cfg, docs), {}};
  TaggerModel& model = res.model;
  if (cfg.epochs == 0) return res;

  int max_epochs = cfg.max_epochs > 0 ? cfg.max_epochs : cfg.epochs;
  Rng shuffle_rng = Rng::derive(cfg.seed, "shuffle");
  Rng dropout_rng = Rng::derive(cfg.seed, "dropout");
  Rng oov_rng = Rng::derive(cfg.seed, "oov");
  nn::AdamState adam(cfg.adam);
  const crf::ConstraintMask* train_mask =
      cfg.constrain_training ? &mask : nullptr;

  std::vector<std::size_t> order(sents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double rate = nn::dropout_schedule(epoch, max_epochs, cfg.dropout_base);
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.minibatch_size)) {
      std::size_t end = std::min(
          begin + static_cast<std::size_t>(cfg.minibatch_size), order.size());
      ag::Graph g;
      ag::ParamBinder binder(g);
      TaggerNodes nodes = bind_tagger(binder, model);
      std::vector<ag::Node*> nlls;
      for (std::size_t i = begin; i < end; ++i) {
        std::size_t si = order[i];
        std::vector<ag::Node*> emissions = tagger_emissions(
            g, nodes, model, *sents[si], true, rate, &dropout_rng, &oov_rng);
        nlls.push_back(crf::nll(emissions, nodes.crf, golds[si], train_mask));
      }
      ag::Node* loss = nlls.size() == 1 ? nlls[0] : ag::mean(ag::concat(nlls));
      double loss_value = loss->value.scalar_value();
      if (!std::isfinite(loss_value))
        throw NumericError("training: non-finite minibatch loss");
      ag::backward(loss);
      std::vector<ag::Tensor> grads;
      grads.reserve(binder.bound().size());
      for (ag::Node* p : binder.bound())
        grads.push_back(p->grad_ready ? p->grad
                                      : ag::Tensor::zeros(p->value.shape()));
      adam.step(binder.tensors(), grads);
      loss_sum += loss_value;
      ++n_batches;
    }
    res.epoch_losses.push_back(loss_sum / static_cast<double>(n_batches));
  }
  return res;
}

ag::Tensor tagger_emission_matrix(const TaggerModel& m, const Sentence& s) {
  ag::Graph g;
  TaggerNodes nodes = constant_tagger(g, m);
  std::vector<ag::Node*> rows = tagger_emissions(g, nodes, m, s);
  ag::Tensor e = ag::Tensor::zeros(
      {static_cast<ag::Index>(rows.size()), ag::Index{kNumTags}});
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (ag::Index k = 0; k < kNumTags; ++k)
      e(static_cast<ag::Index>(t), k) = rows[t]->value(k);
  return e;
}

void predict_tags(const TaggerModel& m, Sentence& s) {
  static const crf::ConstraintMask mask = crf::build_constraint_mask();
  ag::Tensor e = tagger_emission_matrix(m, s);
  crf::ViterbiResult v = crf::viterbi(e, m.crf, &mask);
  for (std::size_t i = 0; i < s.records.size(); ++i)
    s.records[i].pred = v.tags[i];
}

void predict_tags(const TaggerModel& m, std::span<Document> docs) {
  for (Document& d : docs)
    for (Sentence& s : d.sentences) predict_tags(m, s);
}

Sentence predict(const TaggerModel& m, const std::string& utf8_text,
                 const Gazetteer* gaz) {
  std::u32string text = decode_utf8(utf8_text);
  if (text.empty()) throw DataError("predict: empty input text");
  Sentence s;
  for (char32_t ch : text) {
    CharRecord r;
    r.ch = ch;
    r.ctype = classify_char_type(ch);
    s.records.push_back(std::move(r));
  }
  if (gaz != nullptr) gaz->annotate(s);
  predict_tags(m, s);
  return s;
}

}  // namespace dner
