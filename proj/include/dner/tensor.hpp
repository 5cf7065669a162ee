#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <string>
#include <vector>

#include "dner/errors.hpp"

namespace dner::ag {

using Index = Eigen::Index;
using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrixXd>;
using ConstMatMap = Eigen::Map<const RowMatrixXd>;
using ArrMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrMap = Eigen::Map<const Eigen::ArrayXd>;

// Dense 64-bit float value of rank 1 or 2, row-major. Scalars are represented
// as shape [1]. Eigen maps give matrix/array views over the flat storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<Index> shape);
  static Tensor full(std::vector<Index> shape, double value);
  static Tensor scalar(double v);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(const std::vector<double>& values);
  static Tensor matrix(Index rows, Index cols,
                       std::initializer_list<double> row_major_values);
  static Tensor from_matrix(const Eigen::MatrixXd& m);

  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return data_.size(); }
  const std::vector<Index>& shape() const { return shape_; }
  bool is_scalar() const { return size() == 1; }
  bool is_vector() const { return rank() == 1; }
  bool is_matrix() const { return rank() == 2; }
  Index rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? shape_[0] : 0); }
  Index cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? 1 : 0); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double& operator()(Index i) { return data_[i]; }
  double operator()(Index i) const { return data_[i]; }
  double& operator()(Index i, Index j) { return data_[i * shape_[1] + j]; }
  double operator()(Index i, Index j) const { return data_[i * shape_[1] + j]; }
  double scalar_value() const;

  ArrMap flat() { return ArrMap(data_.data(), data_.size()); }
  ConstArrMap flat() const { return ConstArrMap(data_.data(), data_.size()); }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  MatMap mat();
  ConstMatMap mat() const;
  // Any tensor viewed as a column; vectors use this for matmul.
  ConstMatMap as_col() const { return ConstMatMap(data_.data(), data_.size(), 1); }

  bool all_finite() const { return data_.allFinite(); }
  void set_zero() { data_.setZero(); }

  std::string shape_str() const;

 private:
  Tensor(std::vector<Index> shape, Eigen::ArrayXd data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  std::vector<Index> shape_;
  Eigen::ArrayXd data_;
};

bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace dner::ag
