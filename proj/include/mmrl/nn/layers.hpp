// SPDX-License-Identifier: Apache-2.0
//
// Layers with hand-written backward passes. There is no autodiff graph:
// callers keep whatever forward inputs a backward needs and call backwards in
// reverse order. Backward functions accumulate into parameter gradients and
// return the input gradient.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmrl/common/rng.hpp"
#include "mmrl/nn/parameters.hpp"
#include "mmrl/nn/tensor.hpp"

namespace mmrl::nn {

/// y = x W + b with W [in, out], b [out]; x is [batch, in].
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  Tensor forward(const ParameterSet& params, const Tensor& x) const;
  Tensor backward(ParameterSet& params, const Tensor& x, const Tensor& dy) const;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  ParamId weight() const { return weight_; }
  ParamId bias() const { return bias_; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  ParamId weight_ = 0;
  ParamId bias_ = 0;
};

/// Stride-1 cross-correlation with symmetric zero padding.
/// Input [batch, in_channels, H, W]; kernel [out_channels, in_channels, k, k].
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterSet& params, const std::string& name, std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel, std::size_t padding, Rng& rng);

  Shape output_shape(const Shape& input) const;
  Tensor forward(const ParameterSet& params, const Tensor& x) const;
  Tensor backward(ParameterSet& params, const Tensor& x, const Tensor& dy) const;

  ParamId weight() const { return weight_; }
  ParamId bias() const { return bias_; }

 private:
  void check_input(const Shape& input) const;

  std::size_t in_channels_ = 0;
  std::size_t out_channels_ = 0;
  std::size_t kernel_ = 0;
  std::size_t padding_ = 0;
  ParamId weight_ = 0;
  ParamId bias_ = 0;
};

/// 2x2 mean pooling with stride 2 over [batch, C, H, W]; odd trailing rows
/// and columns are dropped.
Tensor mean_pool2x2(const Tensor& x);
Tensor mean_pool2x2_backward(const Shape& input_shape, const Tensor& dy);

/// Token embedding table [vocab, dim]. Id 0 (PAD) always embeds to zeros and
/// never receives gradient, so its row stays pinned at zero.
class Embedding {
 public:
  static constexpr int kPadId = 0;

  Embedding() = default;
  Embedding(ParameterSet& params, const std::string& name, std::size_t vocab, std::size_t dim, Rng& rng);

  /// ids.size() rows of [dim]. Throws ValidationError for ids out of range.
  Tensor forward(const ParameterSet& params, std::span<const int> ids) const;
  void backward(ParameterSet& params, std::span<const int> ids, const Tensor& dy) const;

  std::size_t vocab_size() const { return vocab_; }
  std::size_t dim() const { return dim_; }
  ParamId table() const { return table_; }

 private:
  std::size_t vocab_ = 0;
  std::size_t dim_ = 0;
  ParamId table_ = 0;
};

/// Activations paired with a backward taking the forward input.
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);
Tensor tanh(const Tensor& x);
Tensor tanh_backward_from_output(const Tensor& y, const Tensor& dy);
Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward_from_output(const Tensor& y, const Tensor& dy);

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);

}  // namespace mmrl::nn
