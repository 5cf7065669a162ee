#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "dner/tensor.hpp"

namespace dner::ag {

class Graph;

// One step of a dynamic computation graph. Values are computed eagerly; the
// reverse pass walks nodes in reverse creation order, which is a valid
// topological order because parents always exist before their children.
struct Node {
  Tensor value;
  Tensor grad;  // sized lazily on first contribution
  const char* op = "leaf";
  std::vector<Node*> parents;
  std::function<void(const Node&)> backprop;  // adds into parents' grads
  Graph* graph = nullptr;
  bool track = true;  // false for constants and their pure descendants
  bool grad_ready = false;
  std::uint64_t visit_epoch = 0;

  Tensor& ensure_grad();
  void add_grad(const Tensor& g);
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Differentiable leaf (parameter or input).
  Node* leaf(Tensor v);
  // Non-differentiable leaf; the only place -inf values may enter the graph.
  Node* constant(Tensor v);

  Node* emplace(Tensor value, const char* op, std::vector<Node*> parents,
                std::function<void(const Node&)> backprop);

  std::size_t size() const { return order_.size(); }
  std::span<Node* const> order() const { return order_; }

  std::uint64_t next_epoch() { return ++epoch_; }

 private:
  std::deque<Node> nodes_;
  std::vector<Node*> order_;
  std::uint64_t epoch_ = 0;
};

// Elementwise, same shape.
Node* add(Node* a, Node* b);
Node* sub(Node* a, Node* b);
Node* mul(Node* a, Node* b);

Node* negate(Node* a);
Node* scale(Node* a, double c);

// [m x n] @ [n x p] -> [m x p]; [m x n] @ [n] -> [m].
Node* matmul(Node* a, Node* b);

// Rank-1 concatenation in argument order.
Node* concat(std::span<Node* const> parts);

// Contiguous range of a rank-1 tensor.
Node* slice(Node* v, Index start, Index len);

// Row of a rank-2 tensor; gradient flows only into that row. Embedding
// lookup is this primitive applied to an embedding matrix.
Node* row(Node* m, Index r);

Node* sigmoid(Node* a);
Node* tanh(Node* a);

// log(sum(exp(.))): over all elements (scalar result), or over rows of a
// matrix (one entry per column). -inf entries contribute exactly zero.
Node* logsumexp(Node* a);
Node* logsumexp_cols(Node* m);

Node* sum(Node* a);
Node* mean(Node* a);

// m[i, j] + v[i]: broadcast a column vector across the columns of a matrix.
Node* add_colwise(Node* m, Node* v);

// Populates grad = d(root)/d(node) for every node reachable from the scalar
// root. Gradients accumulate additively across fan-out.
void backward(Node* root);

// Binds parameter tensors into a graph being built and remembers which leaf
// belongs to which tensor, so gradients can be read back per parameter.
class ParamBinder {
 public:
  explicit ParamBinder(Graph& g) : graph_(&g) {}
  Node* bind(Tensor& t);
  std::span<Node* const> bound() const { return nodes_; }
  std::span<Tensor* const> tensors() const { return tensors_; }

 private:
  Graph* graph_;
  std::vector<Node*> nodes_;
  std::vector<Tensor*> tensors_;
};

using BuildFn = std::function<Node*(Graph&, ParamBinder&)>;

// Max over all parameter components of
// |g_ad - g_fd| / max(1, |g_ad|, |g_fd|), with central differences of step h.
// The builder must be deterministic (no dropout).
double check_gradient(const BuildFn& build, std::span<Tensor* const> params,
                      double h = 1e-5);

}  // namespace dner::ag
