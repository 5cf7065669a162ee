#pragma once

// Flat `key = value` run configuration shared by the command-line tools.
// Blank lines and lines starting with '#' are skipped; keys are:
//
//   model_kind          tagger | baseline
//   epochs              training epochs
//   max_epochs          dropout-schedule horizon (defaults to epochs)
//   minibatch_size      sentences per optimizer step
//   dropout_base        initial dropout rate, decayed linearly per epoch
//   seed                master seed; all randomness derives from it
//   use_ctype, use_icd  feature switches (tagger)
//   constrain_training  apply the IOB2 mask inside the training loss
//   lambda_l2           L2 coefficient (baseline)
//   template            unigram | bigram (baseline)
//   adam.alpha, adam.beta1, adam.beta2, adam.eps
//   char_dim, icd_dim, ctype_dim, hidden_dim
//
// Command-line flags override file values.

#include <cstdint>
#include <istream>
#include <string>

#include "dner/baseline.hpp"
#include "dner/tagger.hpp"

namespace dner {

struct RunConfig {
  std::string model_kind = "tagger";
  int epochs = 20;
  int max_epochs = 0;
  int minibatch_size = 10;
  double dropout_base = 0.5;
  std::uint64_t seed = 42;
  bool use_ctype = false;
  bool use_icd = false;
  bool constrain_training = false;
  double lambda_l2 = 1e-4;
  std::string tmpl = "unigram";
  nn::AdamHyper adam;
  TaggerDims dims;

  TrainConfig tagger_config() const;
  BaselineConfig baseline_config() const;
  void validate() const;  // throws on inconsistent settings
};

// Applies one key/value pair; throws DataError on unknown keys or bad values.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

}  // namespace dner
