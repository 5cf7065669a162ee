#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dner/graph.hpp"
#include "dner/tags.hpp"

namespace dner::crf {

using ag::Index;
using ag::Node;
using ag::Tensor;

// Linear-chain CRF parameters over the 5-tag set: transition scores
// transitions(i, j) for tag i -> tag j, plus explicit start and end scores.
struct CrfParams {
  Tensor transitions;  // [K x K]
  Tensor start;        // [K]
  Tensor end;          // [K]

  static CrfParams zeros();
};

// Bound graph leaves for the same parameters.
struct CrfNodes {
  Node* transitions = nullptr;
  Node* start = nullptr;
  Node* end = nullptr;
};

// Legality structure for IOB2: an I-tag may only continue a same-type B/I
// tag, and no sequence may start inside an entity. Applied as -inf penalties
// at use sites; never stored inside CrfParams.
struct ConstraintMask {
  bool trans_allowed[kNumTags][kNumTags];
  bool start_allowed[kNumTags];
  bool end_allowed[kNumTags];
};

ConstraintMask build_constraint_mask();

// True iff the tag sequence uses only mask-allowed start/transitions.
bool mask_allows(const ConstraintMask& mask, std::span<const Tag> tags);

// start[y1] + sum_t e[t][y_t] + sum_{t>=2} trans[y_{t-1}, y_t] + end[y_L].
// Emission rows are per-position [K] nodes.
Node* sequence_score(std::span<Node* const> emissions, const CrfNodes& p,
                     std::span<const Tag> tags);

// Exact log partition by the forward recursion in log space. Masked entries
// contribute -inf, i.e. are excluded.
Node* log_partition(std::span<Node* const> emissions, const CrfNodes& p,
                    const ConstraintMask* mask = nullptr);

// log_partition - sequence_score; >= 0. With a mask, the gold sequence must
// be mask-legal (otherwise its probability would be zero).
Node* nll(std::span<Node* const> emissions, const CrfNodes& p,
          std::span<const Tag> gold, const ConstraintMask* mask = nullptr);

struct ViterbiResult {
  std::vector<Tag> tags;
  double score = 0.0;
};

// Max-score decode over a plain [L x K] emission matrix. Ties break toward
// the lowest tag index at every backtracking choice.
ViterbiResult viterbi(const Tensor& emissions, const CrfParams& p,
                      const ConstraintMask* mask = nullptr);

// Conveniences for decode-side and test-side use: same computations run on
// plain tensors through a throwaway graph.
double sequence_score_value(const Tensor& emissions, const CrfParams& p,
                            std::span<const Tag> tags);
double log_partition_value(const Tensor& emissions, const CrfParams& p,
                           const ConstraintMask* mask = nullptr);
double nll_value(const Tensor& emissions, const CrfParams& p,
                 std::span<const Tag> gold,
                 const ConstraintMask* mask = nullptr);

// Binds CRF parameters into a graph; emission rows of a plain matrix as
// constant nodes.
CrfNodes bind_crf(ag::ParamBinder& binder, CrfParams& p);
std::vector<Node*> emission_rows(ag::Graph& g, const Tensor& emissions);

}  // namespace dner::crf
