// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mmrl::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles. Value type.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Rank-2 element access.
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  void fill(double value);
  /// Reinterprets the data with a new shape of the same element count.
  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws ValidationError("<what>: shape mismatch ...") unless equal.
void require_shape(const Tensor& t, const Shape& expected, const char* what);

/// [m, k] x [k, n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T b for a [k, m], b [k, n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a b^T for a [m, k], b [n, k]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Elementwise a += b (same size).
void add_inplace(Tensor& a, const Tensor& b);

}  // namespace mmrl::nn
