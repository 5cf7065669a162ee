#include "dner/layers.hpp"

#include <array>
#include <cmath>

#include "dner/errors.hpp"

namespace dner::nn {

void glorot_init(Tensor& w, Index fan_in, Index fan_out, Rng& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Index i = 0; i < w.size(); ++i) w.flat()[i] = rng.uniform(-bound, bound);
}

EmbeddingTable EmbeddingTable::init(Index vocab_size, Index dim, Rng& rng) {
  if (vocab_size < 1 || dim < 1)
    throw ShapeError("EmbeddingTable: vocab_size and dim must be positive");
  EmbeddingTable t;
  t.vocab_size = vocab_size;
  t.dim = dim;
  t.weights = Tensor::zeros({vocab_size, dim});
  for (Index i = 0; i < t.weights.size(); ++i)
    t.weights.flat()[i] = rng.uniform(-0.05, 0.05);
  return t;
}

LstmParams LstmParams::init(Index input_dim, Index hidden_dim, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1)
    throw ShapeError("LstmParams: dims must be positive");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.W = Tensor::zeros({4 * hidden_dim, input_dim});
  p.U = Tensor::zeros({4 * hidden_dim, hidden_dim});
  p.b = Tensor::zeros({4 * hidden_dim});
  glorot_init(p.W, input_dim, 4 * hidden_dim, rng);
  glorot_init(p.U, hidden_dim, 4 * hidden_dim, rng);
  // Forget-gate bias at 1 keeps early cell state alive.
  p.b.flat().segment(hidden_dim, hidden_dim) = 1.0;
  return p;
}

LinearParams LinearParams::init(Index in, Index out, Rng& rng) {
  if (in < 1 || out < 1) throw ShapeError("LinearParams: dims must be positive");
  LinearParams p;
  p.in = in;
  p.out = out;
  p.W = Tensor::zeros({out, in});
  p.b = Tensor::zeros({out});
  glorot_init(p.W, in, out, rng);
  return p;
}

LstmNodes bind_lstm(ag::ParamBinder& binder, LstmParams& p) {
  return LstmNodes{binder.bind(p.W), binder.bind(p.U), binder.bind(p.b),
                   p.hidden_dim};
}

LinearNodes bind_linear(ag::ParamBinder& binder, LinearParams& p) {
  return LinearNodes{binder.bind(p.W), binder.bind(p.b)};
}

Node* embed(Node* table, Index index) {
  if (table->value.rank() != 2)
    throw ShapeError("embed: table must be a matrix, got " +
                     table->value.shape_str());
  if (index < 0 || index >= table->value.shape()[0])
    throw ShapeError("embed: index " + std::to_string(index) +
                     " out of vocabulary of size " +
                     std::to_string(table->value.shape()[0]));
  return ag::row(table, index);
}

std::pair<Node*, Node*> lstm_step(const LstmNodes& p, Node* x_t, Node* h_prev,
                                  Node* c_prev) {
  const Index H = p.hidden_dim;
  Node* gates =
      ag::add(ag::add(ag::matmul(p.W, x_t), ag::matmul(p.U, h_prev)), p.b);
  Node* i = ag::sigmoid(ag::slice(gates, 0, H));
  Node* f = ag::sigmoid(ag::slice(gates, H, H));
  Node* g = ag::tanh(ag::slice(gates, 2 * H, H));
  Node* o = ag::sigmoid(ag::slice(gates, 3 * H, H));
  Node* c_t = ag::add(ag::mul(f, c_prev), ag::mul(i, g));
  Node* h_t = ag::mul(o, ag::tanh(c_t));
  return {h_t, c_t};
}

std::vector<Node*> bilstm(const LstmNodes& fwd, const LstmNodes& bwd,
                          std::span<Node* const> xs) {
  if (xs.empty()) throw ShapeError("bilstm: empty input sequence");
  ag::Graph& g = *xs[0]->graph;
  const std::size_t L = xs.size();

  auto run = [&g](const LstmNodes& p, auto begin, auto end) {
    std::vector<Node*> hs;
    Node* h = g.constant(Tensor::zeros({p.hidden_dim}));
    Node* c = g.constant(Tensor::zeros({p.hidden_dim}));
    for (auto it = begin; it != end; ++it) {
      auto [h_t, c_t] = lstm_step(p, *it, h, c);
      h = h_t;
      c = c_t;
      hs.push_back(h_t);
    }
    return hs;
  };

  std::vector<Node*> h_fwd = run(fwd, xs.begin(), xs.end());
  std::vector<Node*> h_bwd = run(bwd, xs.rbegin(), xs.rend());

  std::vector<Node*> out;
  out.reserve(L);
  for (std::size_t t = 0; t < L; ++t) {
    std::array<Node*, 2> parts{h_fwd[t], h_bwd[L - 1 - t]};
    out.push_back(ag::concat(parts));
  }
  return out;
}

Node* linear(const LinearNodes& p, Node* x) {
  return ag::add(ag::matmul(p.W, x), p.b);
}

Node* dropout(Node* x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0)
    throw UsageError("dropout: rate must be in [0, 1), got " +
                     std::to_string(rate));
  if (!training) return x;
  Tensor mask = Tensor::zeros(x->value.shape());
  double keep_scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i)
    mask.flat()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  if (rate == 0.0) return x;
  return ag::mul(x, x->graph->constant(std::move(mask)));
}

double dropout_schedule(int epoch, int max_epochs, double base) {
  if (max_epochs <= 0)
    throw UsageError("dropout_schedule: max_epochs must be positive");
  if (epoch < 0 || epoch > max_epochs)
    throw UsageError("dropout_schedule: epoch out of [0, max_epochs]");
  return base * (1.0 - static_cast<double>(epoch) / max_epochs);
}

}  // namespace dner::nn
