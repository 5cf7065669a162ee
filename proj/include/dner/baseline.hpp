#pragma once

// Feature-templated linear-chain CRF over character indicator features: the
// classic sparse-feature comparator for the neural tagger.  Emissions are sums
// of weight rows for the features active at each position; inference and the
// likelihood share the `crf` module with the neural path.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dner/adam.hpp"
#include "dner/corpus.hpp"
#include "dner/crf.hpp"
#include "dner/graph.hpp"
#include "dner/vocab.hpp"

namespace dner {

enum class FeatureTemplate { kUnigram, kBigram };

const char* feature_template_name(FeatureTemplate t);
FeatureTemplate parse_feature_template(const std::string& s);

struct BaselineModel {
  FeatureTemplate tmpl = FeatureTemplate::kUnigram;
  Vocabulary features;  // feature string -> row; unseen features hit row 0
  ag::Tensor weights;   // [|features| x 5]
  crf::CrfParams crf;
  double lambda_l2 = 1e-4;
};

struct BaselineConfig {
  FeatureTemplate tmpl = FeatureTemplate::kUnigram;
  int epochs = 20;
  int minibatch_size = 10;
  double lambda_l2 = 1e-4;
  nn::AdamHyper adam;
  std::uint64_t seed = 42;
  bool constrain_training = false;
};

// Features active at 1-based position t:
//   unigram: U:<c_t>
//   bigram:  U:<c_t> and B:<c_{t-1}>\t<c_t>, with <BOS> standing in at t=1.
std::vector<std::string> feature_strings(const Sentence& s, FeatureTemplate tmpl,
                                         std::size_t t);

// The same features resolved through the model's vocabulary.
std::vector<std::size_t> extract_features(const BaselineModel& m,
                                          const Sentence& s, std::size_t t);

// Per-position emission rows inside a graph (training path).
std::vector<ag::Node*> baseline_emissions(ag::Graph& g, ag::Node* weights,
                                          const BaselineModel& m,
                                          const Sentence& s);

// Plain [L x 5] emission matrix (decode path).
ag::Tensor baseline_emission_matrix(const BaselineModel& m, const Sentence& s);

struct BaselineTrainResult {
  BaselineModel model;
  std::vector<double> epoch_losses;
};

// Same minibatch protocol as the neural tagger; objective per minibatch is
// mean sentence nll plus lambda * squared norm of all parameters.
BaselineTrainResult train_baseline(const BaselineConfig& cfg,
                                   std::span<const Document> docs);

void baseline_predict_tags(const BaselineModel& m, Sentence& s);
void baseline_predict_tags(const BaselineModel& m, std::span<Document> docs);

}  // namespace dner
