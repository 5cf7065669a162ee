#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dner/graph.hpp"
#include "dner/rng.hpp"

namespace dner::nn {

using ag::Index;
using ag::Node;
using ag::Tensor;

// Embedding matrix [vocab_size x dim]. Row 0 is the UNK row whenever the
// owning vocabulary reserves one.
struct EmbeddingTable {
  Index vocab_size = 0;
  Index dim = 0;
  Tensor weights;

  static EmbeddingTable init(Index vocab_size, Index dim, Rng& rng);
};

// Gate order inside the stacked [4H] blocks: input, forget, cell, output.
struct LstmParams {
  Index input_dim = 0;
  Index hidden_dim = 0;
  Tensor W;  // [4H x input]
  Tensor U;  // [4H x hidden]
  Tensor b;  // [4H], forget block initialized to 1

  static LstmParams init(Index input_dim, Index hidden_dim, Rng& rng);
};

struct LinearParams {
  Index in = 0;
  Index out = 0;
  Tensor W;  // [out x in]
  Tensor b;  // [out]

  static LinearParams init(Index in, Index out, Rng& rng);
};

struct LstmNodes {
  Node* W = nullptr;
  Node* U = nullptr;
  Node* b = nullptr;
  Index hidden_dim = 0;
};

struct LinearNodes {
  Node* W = nullptr;
  Node* b = nullptr;
};

LstmNodes bind_lstm(ag::ParamBinder& binder, LstmParams& p);
LinearNodes bind_linear(ag::ParamBinder& binder, LinearParams& p);

// Row lookup with a vocabulary-facing bounds check.
Node* embed(Node* table, Index index);

// h_t, c_t from one LSTM step:
//   i, f, o = sigmoid gates; g = tanh candidate;
//   c_t = f * c_prev + i * g;  h_t = o * tanh(c_t).
std::pair<Node*, Node*> lstm_step(const LstmNodes& p, Node* x_t, Node* h_prev,
                                  Node* c_prev);

// Per-position concat(h_fwd[t], h_bwd[t]); both directions start from zero
// state, the backward direction consumes the sequence reversed and its
// outputs are re-reversed before concatenation.
std::vector<Node*> bilstm(const LstmNodes& fwd, const LstmNodes& bwd,
                          std::span<Node* const> xs);

Node* linear(const LinearNodes& p, Node* x);

// Inverted dropout: during training each component is zeroed with the given
// probability and survivors are scaled by 1/(1-rate); identity at inference.
// Always consumes one uniform draw per component while training so random
// streams stay aligned across configurations.
Node* dropout(Node* x, double rate, Rng& rng, bool training);

// base * (1 - epoch / max_epochs).
double dropout_schedule(int epoch, int max_epochs, double base);

// Uniform Glorot bounds +-sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor& w, Index fan_in, Index fan_out, Rng& rng);

}  // namespace dner::nn
