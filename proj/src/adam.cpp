#include "dner/adam.hpp"

#include <cmath>
#include <string>

#include "dner/errors.hpp"

namespace dner::nn {

void AdamState::step(std::span<Tensor* const> params,
                     std::span<const Tensor> grads) {
  if (params.size() != grads.size())
    throw ShapeError("adam: " + std::to_string(params.size()) +
                     " params vs " + std::to_string(grads.size()) + " grads");
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.push_back(Tensor::zeros(p->shape()));
      v_.push_back(Tensor::zeros(p->shape()));
    }
  }
  if (m_.size() != params.size())
    throw ShapeError("adam: parameter count changed between steps");

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].same_shape(*params[i]))
      throw ShapeError("adam: gradient shape " + grads[i].shape_str() +
                       " vs parameter " + params[i]->shape_str());
    if (!grads[i].all_finite())
      throw NumericError("adam: non-finite gradient in parameter " +
                         std::to_string(i) + "; training aborted");
  }

  ++t_;
  double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads[i].flat();
    auto m = m_[i].flat();
    auto v = v_[i].flat();
    m = hyper_.beta1 * m + (1.0 - hyper_.beta1) * g;
    v = hyper_.beta2 * v + (1.0 - hyper_.beta2) * g.square();
    params[i]->flat() -=
        hyper_.alpha * (m / bc1) / ((v / bc2).sqrt() + hyper_.eps);
  }
}

}  // namespace dner::nn
