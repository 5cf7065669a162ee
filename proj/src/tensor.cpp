#include "dner/tensor.hpp"

#include <cstring>
#include <numeric>
#include <sstream>

namespace dner::ag {

namespace {

Index shape_product(const std::vector<Index>& shape) {
  Index n = 1;
  for (Index d : shape) {
    if (d < 0) throw ShapeError("Tensor: negative dimension");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<Index> shape) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("Tensor: rank must be 1 or 2");
  Index n = shape_product(shape);
  return Tensor(std::move(shape), Eigen::ArrayXd::Zero(n));
}

Tensor Tensor::full(std::vector<Index> shape, double value) {
  Tensor t = zeros(std::move(shape));
  t.flat() = value;
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t = zeros({1});
  t(0) = v;
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  Tensor t = zeros({static_cast<Index>(values.size())});
  Index i = 0;
  for (double v : values) t(i++) = v;
  return t;
}

Tensor Tensor::vector(const std::vector<double>& values) {
  Tensor t = zeros({static_cast<Index>(values.size())});
  for (Index i = 0; i < t.size(); ++i) t(i) = values[static_cast<std::size_t>(i)];
  return t;
}

Tensor Tensor::matrix(Index rows, Index cols,
                      std::initializer_list<double> row_major_values) {
  if (static_cast<Index>(row_major_values.size()) != rows * cols)
    throw ShapeError("Tensor::matrix: value count does not match shape");
  Tensor t = zeros({rows, cols});
  Index i = 0;
  for (double v : row_major_values) t.flat()[i++] = v;
  return t;
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
  Tensor t = zeros({m.rows(), m.cols()});
  t.mat() = m;
  return t;
}

double Tensor::scalar_value() const {
  if (size() != 1) throw ShapeError("Tensor: not a scalar, shape " + shape_str());
  return data_[0];
}

MatMap Tensor::mat() {
  if (rank() != 2) throw ShapeError("Tensor: matrix view of shape " + shape_str());
  return MatMap(data_.data(), shape_[0], shape_[1]);
}

ConstMatMap Tensor::mat() const {
  if (rank() != 2) throw ShapeError("Tensor: matrix view of shape " + shape_str());
  return ConstMatMap(data_.data(), shape_[0], shape_[1]);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace dner::ag
