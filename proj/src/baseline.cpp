#include "dner/baseline.hpp"

#include <cmath>
#include <numeric>

#include "dner/errors.hpp"
#include "dner/rng.hpp"
#include "dner/utf8.hpp"

namespace dner {

const char* feature_template_name(FeatureTemplate t) {
  return t == FeatureTemplate::kUnigram ? "unigram" : "bigram";
}

FeatureTemplate parse_feature_template(const std::string& s) {
  if (s == "unigram") return FeatureTemplate::kUnigram;
  if (s == "bigram") return FeatureTemplate::kBigram;
  throw DataError("unknown feature template '" + s + "'");
}

std::vector<std::string> feature_strings(const Sentence& s, FeatureTemplate tmpl,
                                         std::size_t t) {
  if (t < 1 || t > s.records.size())
    throw UsageError("feature extraction: position " + std::to_string(t) +
                     " outside sentence of length " +
                     std::to_string(s.records.size()));
  std::vector<std::string> fs;
  std::string cur = encode_utf8(s.records[t - 1].ch);
  fs.push_back("U:" + cur);
  if (tmpl == FeatureTemplate::kBigram) {
    std::string prev = t == 1 ? "<BOS>" : encode_utf8(s.records[t - 2].ch);
    fs.push_back("B:" + prev + "\t" + cur);
  }
  return fs;
}

std::vector<std::size_t> extract_features(const BaselineModel& m,
                                          const Sentence& s, std::size_t t) {
  std::vector<std::size_t> ids;
  for (const std::string& f : feature_strings(s, m.tmpl, t))
    ids.push_back(m.features.lookup(f));
  return ids;
}

std::vector<ag::Node*> baseline_emissions(ag::Graph& g, ag::Node* weights,
                                          const BaselineModel& m,
                                          const Sentence& s) {
  (void)g;
  if (s.records.empty()) throw DataError("baseline: empty sentence");
  std::vector<ag::Node*> rows;
  rows.reserve(s.records.size());
  for (std::size_t t = 1; t <= s.records.size(); ++t) {
    ag::Node* e = nullptr;
    for (std::size_t fid : extract_features(m, s, t)) {
      ag::Node* r = ag::row(weights, static_cast<ag::Index>(fid));
      e = e == nullptr ? r : ag::add(e, r);
    }
    rows.push_back(e);
  }
  return rows;
}

ag::Tensor baseline_emission_matrix(const BaselineModel& m, const Sentence& s) {
  if (s.records.empty()) throw DataError("baseline: empty sentence");
  ag::Index l = static_cast<ag::Index>(s.records.size());
  ag::Tensor e = ag::Tensor::zeros({l, ag::Index{kNumTags}});
  for (std::size_t t = 1; t <= s.records.size(); ++t)
    for (std::size_t fid : extract_features(m, s, t))
      for (ag::Index k = 0; k < kNumTags; ++k)
        e(static_cast<ag::Index>(t - 1), k) +=
            m.weights(static_cast<ag::Index>(fid), k);
  return e;
}

BaselineTrainResult train_baseline(const BaselineConfig& cfg,
                                   std::span<const Document> docs) {
  if (cfg.epochs < 0) throw UsageError("training: negative epoch count");
  if (cfg.minibatch_size < 1)
    throw UsageError("training: minibatch_size must be >= 1");
  if (cfg.lambda_l2 < 0.0) throw UsageError("training: negative lambda_l2");
  crf::ConstraintMask mask = crf::build_constraint_mask();

  std::vector<const Sentence*> sents;
  for (const Document& d : docs)
    for (const Sentence& s : d.sentences) sents.push_back(&s);
  if (sents.empty()) throw DataError("training: corpus has no sentences");
  std::vector<std::vector<Tag>> golds;
  golds.reserve(sents.size());
  for (const Sentence* s : sents) {
    if (!s->has_tags()) throw DataError("training: corpus has untagged sentences");
    std::vector<Tag> gold = s->tags();
    if (!crf::mask_allows(mask, gold))
      throw DataError("training: gold tags violate the tagging scheme");
    golds.push_back(std::move(gold));
  }

  BaselineTrainResult res;
  BaselineModel& model = res.model;
  model.tmpl = cfg.tmpl;
  model.lambda_l2 = cfg.lambda_l2;
  for (const Sentence* s : sents)
    for (std::size_t t = 1; t <= s->records.size(); ++t)
      for (const std::string& f : feature_strings(*s, cfg.tmpl, t))
        model.features.add(f);
  model.weights = ag::Tensor::zeros(
      {static_cast<ag::Index>(model.features.size()), ag::Index{kNumTags}});
  model.crf = crf::CrfParams::zeros();
  if (cfg.epochs == 0) return res;

  Rng shuffle_rng = Rng::derive(cfg.seed, "shuffle");
  nn::AdamState adam(cfg.adam);
  const crf::ConstraintMask* train_mask =
      cfg.constrain_training ? &mask : nullptr;

  std::vector<std::size_t> order(sents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.minibatch_size)) {
      std::size_t end = std::min(
          begin + static_cast<std::size_t>(cfg.minibatch_size), order.size());
      ag::Graph g;
      ag::ParamBinder binder(g);
      ag::Node* weights = binder.bind(model.weights);
      crf::CrfNodes crf_nodes = crf::bind_crf(binder, model.crf);
      std::vector<ag::Node*> nlls;
      for (std::size_t i = begin; i < end; ++i) {
        std::size_t si = order[i];
        std::vector<ag::Node*> rows =
            baseline_emissions(g, weights, model, *sents[si]);
        nlls.push_back(crf::nll(rows, crf_nodes, golds[si], train_mask));
      }
      ag::Node* loss = nlls.size() == 1 ? nlls[0] : ag::mean(ag::concat(nlls));
      if (cfg.lambda_l2 > 0.0) {
        ag::Node* reg = ag::sum(ag::mul(weights, weights));
        for (ag::Node* p :
             {crf_nodes.transitions, crf_nodes.start, crf_nodes.end})
          reg = ag::add(reg, ag::sum(ag::mul(p, p)));
        loss = ag::add(loss, ag::scale(reg, cfg.lambda_l2));
      }
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

void baseline_predict_tags(const BaselineModel& m, Sentence& s) {
  static const crf::ConstraintMask mask = crf::build_constraint_mask();
  ag::Tensor e = baseline_emission_matrix(m, s);
  crf::ViterbiResult v = crf::viterbi(e, m.crf, &mask);
  for (std::size_t i = 0; i < s.records.size(); ++i)
    s.records[i].pred = v.tags[i];
}

void baseline_predict_tags(const BaselineModel& m, std::span<Document> docs) {
  for (Document& d : docs)
    for (Sentence& s : d.sentences) baseline_predict_tags(m, s);
}

}  // namespace dner
