#pragma once

// The full character tagger: per-character embeddings (surface, optional
// dictionary code, optional character type) -> dropout -> BiLSTM -> dropout
// -> linear emission scores -> linear-chain CRF.  Training minimizes the mean
// per-sentence CRF negative log-likelihood over shuffled minibatches with
// Adam; decoding always runs under the IOB2 constraint mask, so emitted tag
// sequences are valid by construction.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dner/adam.hpp"
#include "dner/corpus.hpp"
#include "dner/crf.hpp"
#include "dner/gazetteer.hpp"
#include "dner/graph.hpp"
#include "dner/layers.hpp"
#include "dner/rng.hpp"
#include "dner/vocab.hpp"

namespace dner {

struct FeatureConfig {
  bool use_ctype = false;
  bool use_icd = false;
};

struct TaggerDims {
  ag::Index char_dim = 100;
  ag::Index icd_dim = 100;
  ag::Index ctype_dim = 10;
  ag::Index hidden_dim = 100;  // per direction
};

struct TaggerModel {
  FeatureConfig feat;
  TaggerDims dims;
  Vocabulary char_vocab;
  Vocabulary icd_vocab;  // codes seen in training plus the no-code token "-"
  nn::EmbeddingTable char_emb;
  nn::EmbeddingTable icd_emb;    // empty unless use_icd
  nn::EmbeddingTable ctype_emb;  // 4 rows, no unknown slot; empty unless use_ctype
  nn::LstmParams fwd, bwd;
  nn::LinearParams out;  // [5 x 2*hidden]
  crf::CrfParams crf;

  ag::Index lstm_input_dim() const;
  std::vector<ag::Tensor*> parameters();  // fixed order, matches bind_tagger
};

struct TrainConfig {
  int epochs = 20;
  int max_epochs = 0;  // dropout-schedule horizon; 0 means same as epochs
  int minibatch_size = 10;
  double dropout_base = 0.5;
  nn::AdamHyper adam;
  std::uint64_t seed = 42;
  bool constrain_training = false;
  FeatureConfig feat;
  TaggerDims dims;
};

struct TrainResult {
  TaggerModel model;
  std::vector<double> epoch_losses;  // mean minibatch loss per epoch
};

// Character vocabulary over all training characters (with counts) and, when
// use_icd is set, the code vocabulary over codes present plus "-".
void build_vocabularies(std::span<const Document> docs,
                        const FeatureConfig& feat, Vocabulary& chars,
                        Vocabulary& icd);

// Vocabularies from the corpus, parameters freshly initialized from the
// config seed.  This is also the epoch-zero model of train_tagger.
TaggerModel init_tagger(const TrainConfig& cfg, std::span<const Document> docs);

struct TaggerNodes {
  ag::Node* char_emb = nullptr;
  ag::Node* icd_emb = nullptr;
  ag::Node* ctype_emb = nullptr;
  nn::LstmNodes fwd, bwd;
  nn::LinearNodes out;
  crf::CrfNodes crf;
};

TaggerNodes bind_tagger(ag::ParamBinder& binder, TaggerModel& m);

// Emission rows (one [5] node per character).  Training mode applies dropout
// to the concatenated input embeddings and the encoder outputs, and remaps
// frequency-1 characters to the unknown index with probability 1/2 per
// occurrence; inference mode is deterministic and maps unseen tokens to the
// unknown index.
std::vector<ag::Node*> tagger_emissions(ag::Graph& g, const TaggerNodes& nodes,
                                        const TaggerModel& m, const Sentence& s,
                                        bool training = false,
                                        double dropout_rate = 0.0,
                                        Rng* dropout_rng = nullptr,
                                        Rng* oov_rng = nullptr);

TrainResult train_tagger(const TrainConfig& cfg, std::span<const Document> docs);

// Emission matrix [L x 5] in inference mode.
ag::Tensor tagger_emission_matrix(const TaggerModel& m, const Sentence& s);

// Fills the sentence's predicted tags by masked Viterbi decoding.
void predict_tags(const TaggerModel& m, Sentence& s);
void predict_tags(const TaggerModel& m, std::span<Document> docs);

// Raw text in, fully annotated sentence (char types, dictionary codes when a
// gazetteer is given, predicted tags) out.
Sentence predict(const TaggerModel& m, const std::string& utf8_text,
                 const Gazetteer* gaz);

}  // namespace dner
