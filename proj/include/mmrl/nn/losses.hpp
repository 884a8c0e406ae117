// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "mmrl/nn/tensor.hpp"

namespace mmrl::nn {

/// Loss value and its gradient with respect to the prediction (or logits).
struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// Mean over elements of 0.5 e^2 for |e| <= delta, else delta (|e| - delta/2).
LossResult huber_loss(const Tensor& pred, const Tensor& target, double delta = 1.0);

/// Mean over elements of e^2.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// Mean over the batch of -log softmax(logits)[class]. logits [batch, k].
/// Throws ValidationError for a class index out of range.
LossResult cross_entropy_loss(const Tensor& logits, std::span<const int> classes);

}  // namespace mmrl::nn
