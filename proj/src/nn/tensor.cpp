// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/tensor.hpp"

#include <Eigen/Core>

#include <functional>
#include <numeric>

#include "mmrl/common/errors.hpp"

namespace mmrl::nn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

Map as_matrix(Tensor& t) {
  return Map(t.data().data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw ValidationError(std::string(what) + ": expected a rank-2 tensor, got " + shape_string(t.shape()));
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ValidationError("Tensor: data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
  }
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ValidationError(std::string(what) + ": shape mismatch, expected " + shape_string(expected) + ", got " +
                          shape_string(t.shape()));
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.dim(1) != b.dim(0)) throw ValidationError("matmul: inner dimensions differ");
  Tensor out({a.dim(0), b.dim(1)});
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_tn");
  require_rank2(b, "matmul_tn");
  if (a.dim(0) != b.dim(0)) throw ValidationError("matmul_tn: leading dimensions differ");
  Tensor out({a.dim(1), b.dim(1)});
  as_matrix(out).noalias() = as_matrix(a).transpose() * as_matrix(b);
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  if (a.dim(1) != b.dim(1)) throw ValidationError("matmul_nt: trailing dimensions differ");
  Tensor out({a.dim(0), b.dim(0)});
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b).transpose();
  return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ValidationError("add_inplace: size mismatch");
  auto lhs = a.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
}

}  // namespace mmrl::nn
