#pragma once

#include <span>
#include <vector>

#include "dner/tensor.hpp"

namespace dner::nn {

using ag::Tensor;

struct AdamHyper {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
//   mhat = m / (1-b1^t);   vhat = v / (1-b2^t);
//   theta <- theta - alpha * mhat / (sqrt(vhat) + eps).
// Moment slots are created lazily from the first step's parameter shapes.
class AdamState {
 public:
  explicit AdamState(AdamHyper hyper = {}) : hyper_(hyper) {}

  // Applies one update in place. Throws NumericError on any non-finite
  // gradient component.
  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

  long t() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

}  // namespace dner::nn
