#include "dner/graph.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace dner::ag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void shape_fail(const char* op, const Tensor& a) {
  throw ShapeError(std::string(op) + ": bad shape " + a.shape_str());
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() +
                   " and " + b.shape_str());
}

void require_same_shape(const char* op, const Node* a, const Node* b) {
  if (!a->value.same_shape(b->value)) shape_fail(op, a->value, b->value);
}

void require_same_graph(const char* op, std::span<Node* const> nodes) {
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i]->graph != nodes[0]->graph)
      throw ShapeError(std::string(op) + ": nodes from different graphs");
}

// Log-sum-exp with max subtraction over a contiguous range. -inf entries are
// skipped exactly; an all--inf range yields -inf.
double lse_range(const double* p, Index n, Index stride) {
  double m = kNegInf;
  for (Index i = 0; i < n; ++i) {
    double v = p[i * stride];
    if (v > m) m = v;
  }
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    double v = p[i * stride];
    if (v != kNegInf) s += std::exp(v - m);
  }
  return m + std::log(s);
}

// d/dv_i of lse = exp(v_i - lse); exactly zero for -inf entries.
void lse_backprop_range(const double* vals, double* grads, Index n,
                        Index stride, double lse, double upstream) {
  if (lse == kNegInf) return;
  for (Index i = 0; i < n; ++i) {
    double v = vals[i * stride];
    if (v != kNegInf) grads[i * stride] += upstream * std::exp(v - lse);
  }
}

}  // namespace

Tensor& Node::ensure_grad() {
  if (!grad_ready) {
    grad = Tensor::zeros(value.shape());
    grad_ready = true;
  }
  return grad;
}

void Node::add_grad(const Tensor& g) {
  ensure_grad();
  grad.flat() += g.flat();
}

Node* Graph::leaf(Tensor v) { return emplace(std::move(v), "leaf", {}, nullptr); }

Node* Graph::constant(Tensor v) {
  Node* n = emplace(std::move(v), "constant", {}, nullptr);
  n->track = false;
  return n;
}

Node* Graph::emplace(Tensor value, const char* op, std::vector<Node*> parents,
                     std::function<void(const Node&)> backprop) {
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.op = op;
  n.parents = std::move(parents);
  n.graph = this;
  bool track = n.parents.empty() ? true : false;
  for (Node* p : n.parents) track = track || p->track;
  n.track = track;
  if (n.track) n.backprop = std::move(backprop);
  order_.push_back(&n);
  return &n;
}

namespace {

Node* elementwise2(const char* op, Node* a, Node* b,
                   std::function<void(const Node&)> backprop, Tensor value) {
  require_same_graph(op, std::array<Node*, 2>{a, b});
  return a->graph->emplace(std::move(value), op, {a, b}, std::move(backprop));
}

}  // namespace

Node* add(Node* a, Node* b) {
  require_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = a->value.flat() + b->value.flat();
  return elementwise2(
      "add", a, b,
      [a, b](const Node& self) {
        if (a->track) a->add_grad(self.grad);
        if (b->track) b->add_grad(self.grad);
      },
      std::move(out));
}

Node* sub(Node* a, Node* b) {
  require_same_shape("sub", a, b);
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = a->value.flat() - b->value.flat();
  return elementwise2(
      "sub", a, b,
      [a, b](const Node& self) {
        if (a->track) a->add_grad(self.grad);
        if (b->track) b->ensure_grad().flat() -= self.grad.flat();
      },
      std::move(out));
}

Node* mul(Node* a, Node* b) {
  require_same_shape("mul", a, b);
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = a->value.flat() * b->value.flat();
  return elementwise2(
      "mul", a, b,
      [a, b](const Node& self) {
        if (a->track) a->ensure_grad().flat() += self.grad.flat() * b->value.flat();
        if (b->track) b->ensure_grad().flat() += self.grad.flat() * a->value.flat();
      },
      std::move(out));
}

Node* negate(Node* a) {
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = -a->value.flat();
  return a->graph->emplace(std::move(out), "negate", {a},
                           [a](const Node& self) {
                             a->ensure_grad().flat() -= self.grad.flat();
                           });
}

Node* scale(Node* a, double c) {
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = c * a->value.flat();
  return a->graph->emplace(std::move(out), "scale", {a},
                           [a, c](const Node& self) {
                             a->ensure_grad().flat() += c * self.grad.flat();
                           });
}

Node* matmul(Node* a, Node* b) {
  require_same_graph("matmul", std::array<Node*, 2>{a, b});
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.rank() != 2) shape_fail("matmul", A, B);
  if (B.rank() == 1) {
    if (A.shape()[1] != B.shape()[0]) shape_fail("matmul", A, B);
    Tensor out = Tensor::zeros({A.shape()[0]});
    Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) =
        A.mat() * Eigen::Map<const Eigen::VectorXd>(B.data(), B.size());
    return a->graph->emplace(
        std::move(out), "matmul", {a, b}, [a, b](const Node& self) {
          Eigen::Map<const Eigen::VectorXd> g(self.grad.data(),
                                              self.grad.size());
          if (a->track) {
            a->ensure_grad().mat().noalias() +=
                g * Eigen::Map<const Eigen::VectorXd>(b->value.data(),
                                                      b->value.size())
                        .transpose();
          }
          if (b->track) {
            Tensor& gb = b->ensure_grad();
            Eigen::Map<Eigen::VectorXd>(gb.data(), gb.size()).noalias() +=
                a->value.mat().transpose() * g;
          }
        });
  }
  if (B.rank() == 2) {
    if (A.shape()[1] != B.shape()[0]) shape_fail("matmul", A, B);
    Tensor out = Tensor::zeros({A.shape()[0], B.shape()[1]});
    out.mat().noalias() = A.mat() * B.mat();
    return a->graph->emplace(
        std::move(out), "matmul", {a, b}, [a, b](const Node& self) {
          if (a->track)
            a->ensure_grad().mat().noalias() +=
                self.grad.mat() * b->value.mat().transpose();
          if (b->track)
            b->ensure_grad().mat().noalias() +=
                a->value.mat().transpose() * self.grad.mat();
        });
  }
  shape_fail("matmul", A, B);
}

Node* concat(std::span<Node* const> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  require_same_graph("concat", parts);
  Index total = 0;
  for (Node* p : parts) {
    if (!p->value.is_vector()) shape_fail("concat", p->value);
    total += p->value.size();
  }
  Tensor out = Tensor::zeros({total});
  Index at = 0;
  for (Node* p : parts) {
    out.flat().segment(at, p->value.size()) = p->value.flat();
    at += p->value.size();
  }
  std::vector<Node*> parents(parts.begin(), parts.end());
  return parts[0]->graph->emplace(
      std::move(out), "concat", std::move(parents), [](const Node& self) {
        Index at = 0;
        for (Node* p : self.parents) {
          if (p->track)
            p->ensure_grad().flat() += self.grad.flat().segment(at, p->value.size());
          at += p->value.size();
        }
      });
}

Node* slice(Node* v, Index start, Index len) {
  const Tensor& V = v->value;
  if (!V.is_vector()) shape_fail("slice", V);
  if (start < 0 || len < 0 || start + len > V.size())
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of " + V.shape_str());
  Tensor out = Tensor::zeros({len});
  out.flat() = V.flat().segment(start, len);
  return v->graph->emplace(std::move(out), "slice", {v},
                           [v, start, len](const Node& self) {
                             v->ensure_grad().flat().segment(start, len) +=
                                 self.grad.flat();
                           });
}

Node* row(Node* m, Index r) {
  const Tensor& M = m->value;
  if (M.rank() != 2) shape_fail("row", M);
  if (r < 0 || r >= M.shape()[0])
    throw ShapeError("row: index " + std::to_string(r) + " out of " +
                     M.shape_str());
  Index cols = M.shape()[1];
  Tensor out = Tensor::zeros({cols});
  out.flat() = M.flat().segment(r * cols, cols);
  return m->graph->emplace(std::move(out), "row", {m},
                           [m, r, cols](const Node& self) {
                             m->ensure_grad().flat().segment(r * cols, cols) +=
                                 self.grad.flat();
                           });
}

Node* sigmoid(Node* a) {
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = 1.0 / (1.0 + (-a->value.flat()).exp());
  return a->graph->emplace(std::move(out), "sigmoid", {a},
                           [a](const Node& self) {
                             a->ensure_grad().flat() +=
                                 self.grad.flat() * self.value.flat() *
                                 (1.0 - self.value.flat());
                           });
}

Node* tanh(Node* a) {
  Tensor out = Tensor::zeros(a->value.shape());
  out.flat() = a->value.flat().tanh();
  return a->graph->emplace(std::move(out), "tanh", {a},
                           [a](const Node& self) {
                             a->ensure_grad().flat() +=
                                 self.grad.flat() *
                                 (1.0 - self.value.flat().square());
                           });
}

Node* logsumexp(Node* a) {
  double v = lse_range(a->value.data(), a->value.size(), 1);
  return a->graph->emplace(Tensor::scalar(v), "logsumexp", {a},
                           [a](const Node& self) {
                             lse_backprop_range(a->value.data(),
                                                a->ensure_grad().data(),
                                                a->value.size(), 1,
                                                self.value(0), self.grad(0));
                           });
}

Node* logsumexp_cols(Node* m) {
  const Tensor& M = m->value;
  if (M.rank() != 2) shape_fail("logsumexp_cols", M);
  Index rows = M.shape()[0], cols = M.shape()[1];
  Tensor out = Tensor::zeros({cols});
  for (Index j = 0; j < cols; ++j)
    out(j) = lse_range(M.data() + j, rows, cols);
  return m->graph->emplace(
      std::move(out), "logsumexp_cols", {m}, [m, rows, cols](const Node& self) {
        Tensor& g = m->ensure_grad();
        for (Index j = 0; j < cols; ++j)
          lse_backprop_range(m->value.data() + j, g.data() + j, rows, cols,
                             self.value(j), self.grad(j));
      });
}

Node* sum(Node* a) {
  return a->graph->emplace(Tensor::scalar(a->value.flat().sum()), "sum", {a},
                           [a](const Node& self) {
                             a->ensure_grad().flat() += self.grad(0);
                           });
}

Node* mean(Node* a) {
  double inv = 1.0 / static_cast<double>(a->value.size());
  return a->graph->emplace(Tensor::scalar(a->value.flat().sum() * inv), "mean",
                           {a}, [a, inv](const Node& self) {
                             a->ensure_grad().flat() += self.grad(0) * inv;
                           });
}

Node* add_colwise(Node* m, Node* v) {
  require_same_graph("add_colwise", std::array<Node*, 2>{m, v});
  const Tensor& M = m->value;
  const Tensor& V = v->value;
  if (M.rank() != 2 || !V.is_vector() || V.size() != M.shape()[0])
    shape_fail("add_colwise", M, V);
  Tensor out = Tensor::zeros(M.shape());
  out.mat() = M.mat().colwise() +
              Eigen::Map<const Eigen::VectorXd>(V.data(), V.size());
  return m->graph->emplace(
      std::move(out), "add_colwise", {m, v}, [m, v](const Node& self) {
        if (m->track) m->add_grad(self.grad);
        if (v->track) {
          Tensor& gv = v->ensure_grad();
          Eigen::Map<Eigen::VectorXd>(gv.data(), gv.size()) +=
              self.grad.mat().rowwise().sum();
        }
      });
}

void backward(Node* root) {
  if (root == nullptr) throw ShapeError("backward: null root");
  if (root->value.size() != 1)
    throw ShapeError("backward: root must be scalar, got " +
                     root->value.shape_str());
  Graph* g = root->graph;
  std::uint64_t epoch = g->next_epoch();

  // Mark reachable nodes.
  std::vector<Node*> stack{root};
  root->visit_epoch = epoch;
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    for (Node* p : n->parents) {
      if (p->visit_epoch != epoch) {
        p->visit_epoch = epoch;
        stack.push_back(p);
      }
    }
  }

  root->ensure_grad();
  root->grad(0) = 1.0;

  auto order = g->order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->visit_epoch != epoch || !n->grad_ready) continue;
    if (n->backprop) n->backprop(*n);
  }
}

Node* ParamBinder::bind(Tensor& t) {
  Node* n = graph_->leaf(t);
  nodes_.push_back(n);
  tensors_.push_back(&t);
  return n;
}

double check_gradient(const BuildFn& build, std::span<Tensor* const> params,
                      double h) {
  // Analytic gradients.
  std::vector<Tensor> analytic;
  {
    Graph g;
    ParamBinder binder(g);
    Node* root = build(g, binder);
    backward(root);
    if (binder.tensors().size() != params.size())
      throw ShapeError("check_gradient: builder bound a different parameter set");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (binder.tensors()[i] != params[i])
        throw ShapeError("check_gradient: parameter binding order mismatch");
      Node* leaf = binder.bound()[i];
      analytic.push_back(leaf->grad_ready ? leaf->grad
                                          : Tensor::zeros(leaf->value.shape()));
    }
  }

  auto eval = [&]() {
    Graph g;
    ParamBinder binder(g);
    return build(g, binder)->value.scalar_value();
  };

  double max_err = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    for (Index c = 0; c < p.size(); ++c) {
      double saved = p(c);
      p(c) = saved + h;
      double fp = eval();
      p(c) = saved - h;
      double fm = eval();
      p(c) = saved;
      double g_fd = (fp - fm) / (2.0 * h);
      double g_ad = analytic[i](c);
      double denom = std::max({1.0, std::abs(g_ad), std::abs(g_fd)});
      max_err = std::max(max_err, std::abs(g_ad - g_fd) / denom);
    }
  }
  return max_err;
}

}  // namespace dner::ag
