#include "dner/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dner/errors.hpp"

namespace dner::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int K = kNumTags;

void require_emissions(std::span<Node* const> emissions) {
  if (emissions.empty()) throw ShapeError("crf: empty emission sequence");
  for (Node* e : emissions)
    if (!e->value.is_vector() || e->value.size() != K)
      throw ShapeError("crf: emission row must have shape [" +
                       std::to_string(K) + "], got " + e->value.shape_str());
}

// 0 where allowed, -inf where forbidden.
Tensor start_penalty(const ConstraintMask& m) {
  Tensor t = Tensor::zeros({K});
  for (int i = 0; i < K; ++i)
    if (!m.start_allowed[i]) t(i) = kNegInf;
  return t;
}

Tensor end_penalty(const ConstraintMask& m) {
  Tensor t = Tensor::zeros({K});
  for (int i = 0; i < K; ++i)
    if (!m.end_allowed[i]) t(i) = kNegInf;
  return t;
}

Tensor trans_penalty(const ConstraintMask& m) {
  Tensor t = Tensor::zeros({K, K});
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (!m.trans_allowed[i][j]) t(i, j) = kNegInf;
  return t;
}

}  // namespace

CrfParams CrfParams::zeros() {
  return CrfParams{Tensor::zeros({K, K}), Tensor::zeros({K}), Tensor::zeros({K})};
}

ConstraintMask build_constraint_mask() {
  ConstraintMask m;
  for (int i = 0; i < K; ++i) {
    m.start_allowed[i] = true;
    m.end_allowed[i] = true;
    for (int j = 0; j < K; ++j) m.trans_allowed[i][j] = true;
  }
  auto forbid_inside_unless = [&m](Tag inside, Tag begin) {
    int j = static_cast<int>(inside);
    m.start_allowed[j] = false;
    for (int i = 0; i < K; ++i)
      m.trans_allowed[i][j] =
          (i == static_cast<int>(begin) || i == j);
  };
  forbid_inside_unless(Tag::IP, Tag::BP);
  forbid_inside_unless(Tag::IN, Tag::BN);
  return m;
}

bool mask_allows(const ConstraintMask& mask, std::span<const Tag> tags) {
  if (tags.empty()) return true;
  if (!mask.start_allowed[static_cast<int>(tags[0])]) return false;
  for (std::size_t t = 1; t < tags.size(); ++t)
    if (!mask.trans_allowed[static_cast<int>(tags[t - 1])]
                           [static_cast<int>(tags[t])])
      return false;
  return mask.end_allowed[static_cast<int>(tags.back())];
}

Node* sequence_score(std::span<Node* const> emissions, const CrfNodes& p,
                     std::span<const Tag> tags) {
  require_emissions(emissions);
  if (tags.size() != emissions.size())
    throw ShapeError("sequence_score: " + std::to_string(tags.size()) +
                     " tags for " + std::to_string(emissions.size()) +
                     " emission rows");
  const std::size_t L = tags.size();
  Node* acc = ag::slice(p.start, static_cast<int>(tags[0]), 1);
  for (std::size_t t = 0; t < L; ++t) {
    acc = ag::add(acc, ag::slice(emissions[t], static_cast<int>(tags[t]), 1));
    if (t >= 1) {
      Node* tr = ag::row(p.transitions, static_cast<int>(tags[t - 1]));
      acc = ag::add(acc, ag::slice(tr, static_cast<int>(tags[t]), 1));
    }
  }
  return ag::add(acc, ag::slice(p.end, static_cast<int>(tags.back()), 1));
}

Node* log_partition(std::span<Node* const> emissions, const CrfNodes& p,
                    const ConstraintMask* mask) {
  require_emissions(emissions);
  ag::Graph& g = *p.start->graph;
  const std::size_t L = emissions.size();

  Node* alpha = ag::add(p.start, emissions[0]);
  Node* trans = p.transitions;
  if (mask != nullptr) {
    alpha = ag::add(alpha, g.constant(start_penalty(*mask)));
    trans = ag::add(trans, g.constant(trans_penalty(*mask)));
  }
  for (std::size_t t = 1; t < L; ++t) {
    Node* scores = ag::add_colwise(trans, alpha);  // [i, j]: alpha_i + trans_ij
    alpha = ag::add(ag::logsumexp_cols(scores), emissions[t]);
  }
  Node* final_scores = ag::add(alpha, p.end);
  if (mask != nullptr)
    final_scores = ag::add(final_scores, g.constant(end_penalty(*mask)));
  return ag::logsumexp(final_scores);
}

Node* nll(std::span<Node* const> emissions, const CrfNodes& p,
          std::span<const Tag> gold, const ConstraintMask* mask) {
  if (mask != nullptr && !mask_allows(*mask, gold)) {
    std::string s;
    for (Tag t : gold) {
      if (!s.empty()) s += ' ';
      s += tag_name(t);
    }
    throw DataError("nll: gold sequence forbidden by constraint mask: " + s);
  }
  return ag::sub(log_partition(emissions, p, mask),
                 sequence_score(emissions, p, gold));
}

ViterbiResult viterbi(const Tensor& emissions, const CrfParams& p,
                      const ConstraintMask* mask) {
  if (emissions.rank() != 2 || emissions.shape()[1] != K)
    throw ShapeError("viterbi: emissions must be [L x " + std::to_string(K) +
                     "], got " + emissions.shape_str());
  const Index L = emissions.shape()[0];
  if (L < 1) throw ShapeError("viterbi: empty sequence");

  std::vector<std::array<double, K>> delta(static_cast<std::size_t>(L));
  std::vector<std::array<int, K>> back(static_cast<std::size_t>(L));

  for (int j = 0; j < K; ++j) {
    double s = p.start(j) + emissions(0, j);
    if (mask != nullptr && !mask->start_allowed[j]) s = kNegInf;
    delta[0][j] = s;
    back[0][j] = -1;
  }
  for (Index t = 1; t < L; ++t) {
    for (int j = 0; j < K; ++j) {
      double best = kNegInf;
      int best_i = 0;
      for (int i = 0; i < K; ++i) {
        if (mask != nullptr && !mask->trans_allowed[i][j]) continue;
        double s = delta[t - 1][i] + p.transitions(i, j);
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      delta[t][j] = best + emissions(t, j);
      back[t][j] = best_i;
    }
  }

  double best = kNegInf;
  int best_j = 0;
  for (int j = 0; j < K; ++j) {
    if (mask != nullptr && !mask->end_allowed[j]) continue;
    double s = delta[L - 1][j] + p.end(j);
    if (s > best) {
      best = s;
      best_j = j;
    }
  }

  ViterbiResult res;
  res.tags.resize(static_cast<std::size_t>(L));
  int j = best_j;
  for (Index t = L - 1; t >= 0; --t) {
    res.tags[static_cast<std::size_t>(t)] = static_cast<Tag>(j);
    j = back[t][j];
  }
  res.score = sequence_score_value(emissions, p, res.tags);
  return res;
}

static Node* build_value_graph(ag::Graph& g, const Tensor& emissions,
                               const CrfParams& p,
                               std::function<Node*(std::span<Node* const>,
                                                   const CrfNodes&)> fn) {
  CrfNodes nodes;
  nodes.transitions = g.constant(p.transitions);
  nodes.start = g.constant(p.start);
  nodes.end = g.constant(p.end);
  // Constants do not track gradients; values are all that is needed here.
  std::vector<Node*> rows = emission_rows(g, emissions);
  return fn(rows, nodes);
}

double sequence_score_value(const Tensor& emissions, const CrfParams& p,
                            std::span<const Tag> tags) {
  if (emissions.rank() != 2 ||
      emissions.shape()[0] != static_cast<Index>(tags.size()))
    throw ShapeError("sequence_score: emissions " + emissions.shape_str() +
                     " vs " + std::to_string(tags.size()) + " tags");
  double s = p.start(static_cast<int>(tags[0]));
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += emissions(static_cast<Index>(t), static_cast<int>(tags[t]));
    if (t >= 1)
      s += p.transitions(static_cast<int>(tags[t - 1]),
                         static_cast<int>(tags[t]));
  }
  return s + p.end(static_cast<int>(tags.back()));
}

double log_partition_value(const Tensor& emissions, const CrfParams& p,
                           const ConstraintMask* mask) {
  ag::Graph g;
  return build_value_graph(g, emissions, p,
                           [mask](std::span<Node* const> rows,
                                  const CrfNodes& nodes) {
                             return log_partition(rows, nodes, mask);
                           })
      ->value.scalar_value();
}

double nll_value(const Tensor& emissions, const CrfParams& p,
                 std::span<const Tag> gold, const ConstraintMask* mask) {
  ag::Graph g;
  return build_value_graph(g, emissions, p,
                           [gold, mask](std::span<Node* const> rows,
                                        const CrfNodes& nodes) {
                             return nll(rows, nodes, gold, mask);
                           })
      ->value.scalar_value();
}

CrfNodes bind_crf(ag::ParamBinder& binder, CrfParams& p) {
  CrfNodes nodes;
  nodes.transitions = binder.bind(p.transitions);
  nodes.start = binder.bind(p.start);
  nodes.end = binder.bind(p.end);
  return nodes;
}

std::vector<Node*> emission_rows(ag::Graph& g, const Tensor& emissions) {
  if (emissions.rank() != 2)
    throw ShapeError("emission_rows: need a matrix, got " +
                     emissions.shape_str());
  std::vector<Node*> rows;
  rows.reserve(static_cast<std::size_t>(emissions.shape()[0]));
  Node* m = g.leaf(emissions);
  for (Index t = 0; t < emissions.shape()[0]; ++t)
    rows.push_back(ag::row(m, t));
  return rows;
}

}  // namespace dner::crf
