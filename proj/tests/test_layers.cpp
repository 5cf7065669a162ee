#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dner/adam.hpp"
#include "dner/layers.hpp"

using namespace dner;
using namespace dner::ag;
using namespace dner::nn;

namespace {

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("glorot init stays inside its bound and is seeded") {
  Rng rng(42);
  Tensor w = Tensor::zeros({50, 20});
  glorot_init(w, 50, 20, rng);
  double bound = std::sqrt(6.0 / 70.0);
  double lo = 1e9, hi = -1e9;
  for (Index i = 0; i < w.size(); ++i) {
    CHECK(std::abs(w(i)) <= bound);
    lo = std::min(lo, w(i));
    hi = std::max(hi, w(i));
  }
  CHECK(hi - lo > bound);  // actually spread out

  Rng rng2(42);
  Tensor w2 = Tensor::zeros({50, 20});
  glorot_init(w2, 50, 20, rng2);
  CHECK(bitwise_equal(w, w2));
}

TEST_CASE("embedding init bounds and lookup") {
  Rng rng(7);
  EmbeddingTable t = EmbeddingTable::init(6, 3, rng);
  for (Index i = 0; i < t.weights.size(); ++i)
    CHECK(std::abs(t.weights(i)) <= 0.05);

  Graph g;
  Node* table = g.leaf(t.weights);
  Node* e = embed(table, 4);
  CHECK(e->value(0) == t.weights(4, 0));
  CHECK_THROWS_AS(embed(table, 6), ShapeError);
  CHECK_THROWS_AS(embed(table, -1), ShapeError);
}

TEST_CASE("lstm init puts 1 exactly in the forget-bias block") {
  Rng rng(1);
  LstmParams p = LstmParams::init(3, 4, rng);
  CHECK(p.W.rows() == 16);
  CHECK(p.W.cols() == 3);
  CHECK(p.U.cols() == 4);
  for (Index i = 0; i < 16; ++i) {
    if (i >= 4 && i < 8)
      CHECK(p.b(i) == 1.0);
    else
      CHECK(p.b(i) == 0.0);
  }
}

TEST_CASE("lstm step matches hand-computed recurrence") {
  // H = 1, input dim 1; blocks stacked input, forget, cell, output.
  LstmParams p;
  p.input_dim = 1;
  p.hidden_dim = 1;
  const double wi = 0.3, wf = -0.4, wg = 0.8, wo = 0.2;
  const double ui = 0.1, uf = 0.5, ug = -0.6, uo = 0.7;
  const double bi = 0.05, bf = 1.0, bg = -0.1, bo = 0.0;
  p.W = Tensor::matrix(4, 1, {wi, wf, wg, wo});
  p.U = Tensor::matrix(4, 1, {ui, uf, ug, uo});
  p.b = Tensor::vector({bi, bf, bg, bo});

  Graph g;
  ParamBinder binder(g);
  LstmNodes nodes = bind_lstm(binder, p);
  const double x1 = 0.9, x2 = -1.3;
  Node* h0 = g.constant(Tensor::vector({0.0}));
  Node* c0 = g.constant(Tensor::vector({0.0}));
  auto [h1, c1] = lstm_step(nodes, g.constant(Tensor::vector({x1})), h0, c0);
  auto [h2, c2] = lstm_step(nodes, g.constant(Tensor::vector({x2})), h1, c1);

  auto step = [&](double x, double h, double c) {
    double i = sigma(wi * x + ui * h + bi);
    double f = sigma(wf * x + uf * h + bf);
    double gg = std::tanh(wg * x + ug * h + bg);
    double o = sigma(wo * x + uo * h + bo);
    double cn = f * c + i * gg;
    return std::pair<double, double>{o * std::tanh(cn), cn};
  };
  auto [eh1, ec1] = step(x1, 0.0, 0.0);
  auto [eh2, ec2] = step(x2, eh1, ec1);
  CHECK(h1->value(0) == doctest::Approx(eh1).epsilon(1e-12));
  CHECK(c1->value(0) == doctest::Approx(ec1).epsilon(1e-12));
  CHECK(h2->value(0) == doctest::Approx(eh2).epsilon(1e-12));
  CHECK(c2->value(0) == doctest::Approx(ec2).epsilon(1e-12));
}

TEST_CASE("bilstm concatenates forward and re-reversed backward runs") {
  Rng rng(3);
  LstmParams fwd = LstmParams::init(2, 3, rng);
  LstmParams bwd = LstmParams::init(2, 3, rng);

  Graph g;
  ParamBinder binder(g);
  LstmNodes nf = bind_lstm(binder, fwd);
  LstmNodes nb = bind_lstm(binder, bwd);
  std::vector<Node*> xs;
  for (double v : {0.1, -0.7, 1.2})
    xs.push_back(g.constant(Tensor::vector({v, -v})));

  std::vector<Node*> hs = bilstm(nf, nb, xs);
  REQUIRE(hs.size() == 3);
  CHECK(hs[0]->value.size() == 6);

  // Forward half by hand.
  Node* h = g.constant(Tensor::zeros({3}));
  Node* c = g.constant(Tensor::zeros({3}));
  for (std::size_t t = 0; t < 3; ++t) {
    auto [ht, ct] = lstm_step(nf, xs[t], h, c);
    h = ht;
    c = ct;
    for (Index d = 0; d < 3; ++d) CHECK(hs[t]->value(d) == h->value(d));
  }
  // Backward half: last position's second half is one bwd step on x_last.
  Node* hb = g.constant(Tensor::zeros({3}));
  Node* cb = g.constant(Tensor::zeros({3}));
  auto [hbl, cbl] = lstm_step(nb, xs[2], hb, cb);
  (void)cbl;
  for (Index d = 0; d < 3; ++d) CHECK(hs[2]->value(3 + d) == hbl->value(d));
}

TEST_CASE("linear layer value") {
  LinearParams p;
  p.in = 2;
  p.out = 2;
  p.W = Tensor::matrix(2, 2, {1, 2, 3, 4});
  p.b = Tensor::vector({10, 20});
  Graph g;
  ParamBinder binder(g);
  LinearNodes n = bind_linear(binder, p);
  Node* y = linear(n, g.constant(Tensor::vector({1, -1})));
  CHECK(y->value(0) == 9.0);
  CHECK(y->value(1) == 19.0);
}

TEST_CASE("dropout identity at inference, mask scaling in training") {
  Graph g;
  Node* x = g.leaf(Tensor::full({10000}, 1.0));
  Rng rng(11);
  CHECK(dropout(x, 0.5, rng, false) == x);  // same node, no draws

  Node* d = dropout(x, 0.5, rng, true);
  CHECK(d != x);
  double sum = 0.0;
  int zeros = 0;
  for (Index i = 0; i < d->value.size(); ++i) {
    double v = d->value(i);
    CHECK((v == 0.0 || v == 2.0));
    sum += v;
    zeros += v == 0.0;
  }
  CHECK(sum / 10000.0 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(zeros > 4500);
  CHECK(zeros < 5500);
  CHECK_THROWS_AS(dropout(x, 1.0, rng, true), UsageError);
  CHECK_THROWS_AS(dropout(x, -0.1, rng, false), UsageError);
}

TEST_CASE("dropout at rate 0 still consumes one draw per component") {
  Graph g;
  Node* x = g.leaf(Tensor::full({3}, 1.0));
  Rng used(21);
  Node* d = dropout(x, 0.0, used, true);
  CHECK(d == x);  // rate 0: values pass through

  Rng ref(21);
  ref.uniform();
  ref.uniform();
  ref.uniform();
  CHECK(used.uniform() == ref.uniform());
}

TEST_CASE("dropout schedule decays linearly to zero") {
  CHECK(dropout_schedule(0, 20, 0.5) == 0.5);
  CHECK(dropout_schedule(10, 20, 0.5) == doctest::Approx(0.25));
  CHECK(dropout_schedule(20, 20, 0.5) == 0.0);
  CHECK(dropout_schedule(3, 10, 0.0) == 0.0);
  CHECK_THROWS_AS(dropout_schedule(1, 0, 0.5), UsageError);
  CHECK_THROWS_AS(dropout_schedule(-1, 10, 0.5), UsageError);
  CHECK_THROWS_AS(dropout_schedule(11, 10, 0.5), UsageError);
}

TEST_CASE("adam single and double step match closed forms") {
  AdamHyper h;  // alpha 1e-3, beta1 0.9, beta2 0.999, eps 1e-8
  const double g1 = 0.7, g2 = -1.3, w0 = 0.25;

  Tensor w = Tensor::vector({w0});
  std::vector<Tensor*> params{&w};
  AdamState adam(h);

  std::vector<Tensor> grads{Tensor::vector({g1})};
  adam.step(params, grads);

  double m1 = (1.0 - h.beta1) * g1;
  double v1 = (1.0 - h.beta2) * g1 * g1;
  double mh1 = m1 / (1.0 - h.beta1);
  double vh1 = v1 / (1.0 - h.beta2);
  double w1 = w0 - h.alpha * mh1 / (std::sqrt(vh1) + h.eps);
  CHECK(std::abs(w(0) - w1) < 1e-12);

  grads[0] = Tensor::vector({g2});
  adam.step(params, grads);
  double m2 = h.beta1 * m1 + (1.0 - h.beta1) * g2;
  double v2 = h.beta2 * v1 + (1.0 - h.beta2) * g2 * g2;
  double mh2 = m2 / (1.0 - h.beta1 * h.beta1);
  double vh2 = v2 / (1.0 - h.beta2 * h.beta2);
  double w2 = w1 - h.alpha * mh2 / (std::sqrt(vh2) + h.eps);
  CHECK(std::abs(w(0) - w2) < 1e-12);
  CHECK(adam.t() == 2);
}

TEST_CASE("adam rejects shape changes and non-finite gradients") {
  Tensor w = Tensor::vector({0.0});
  std::vector<Tensor*> params{&w};
  AdamState adam;
  std::vector<Tensor> bad{Tensor::vector({std::nan("")})};
  CHECK_THROWS_AS(adam.step(params, bad), NumericError);
  std::vector<Tensor> wrong{Tensor::vector({1.0, 2.0})};
  CHECK_THROWS_AS(adam.step(params, wrong), ShapeError);
}

TEST_CASE("gradient flows through a small lstm") {
  Rng rng(17);
  LstmParams p = LstmParams::init(2, 2, rng);
  Tensor x1 = Tensor::vector({0.5, -0.5});
  Tensor x2 = Tensor::vector({1.0, 0.25});

  std::vector<Tensor*> params{&p.W, &p.U, &p.b, &x1, &x2};
  auto build = [&](Graph& g, ParamBinder& binder) -> Node* {
    LstmNodes nodes = bind_lstm(binder, p);
    Node* nx1 = binder.bind(x1);
    Node* nx2 = binder.bind(x2);
    Node* h = g.constant(Tensor::zeros({2}));
    Node* c = g.constant(Tensor::zeros({2}));
    auto [h1, c1] = lstm_step(nodes, nx1, h, c);
    auto [h2, c2] = lstm_step(nodes, nx2, h1, c1);
    (void)c2;
    return sum(ag::tanh(h2));
  };
  CHECK(check_gradient(build, params) < 1e-6);
}
