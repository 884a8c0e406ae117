// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/losses.hpp"

#include <cmath>

#include "mmrl/common/errors.hpp"
#include "mmrl/nn/layers.hpp"

namespace mmrl::nn {

LossResult huber_loss(const Tensor& pred, const Tensor& target, double delta) {
  require_shape(target, pred.shape(), "huber_loss");
  LossResult out{0.0, Tensor(pred.shape())};
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    if (std::abs(e) <= delta) {
      out.value += 0.5 * e * e;
      out.grad[i] = e / n;
    } else {
      out.value += delta * (std::abs(e) - 0.5 * delta);
      out.grad[i] = (e > 0.0 ? delta : -delta) / n;
    }
  }
  out.value /= n;
  return out;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  require_shape(target, pred.shape(), "mse_loss");
  LossResult out{0.0, Tensor(pred.shape())};
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    out.value += e * e;
    out.grad[i] = 2.0 * e / n;
  }
  out.value /= n;
  return out;
}

LossResult cross_entropy_loss(const Tensor& logits, std::span<const int> classes) {
  if (logits.rank() != 2 || logits.dim(0) != classes.size()) {
    throw ValidationError("cross_entropy_loss: shape mismatch");
  }
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  const Tensor logp = log_softmax(logits);
  LossResult out{0.0, Tensor(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    if (classes[b] < 0 || static_cast<std::size_t>(classes[b]) >= k) {
      throw ValidationError("cross_entropy_loss: class index " + std::to_string(classes[b]) + " out of range");
    }
    const auto cls = static_cast<std::size_t>(classes[b]);
    out.value -= logp(b, cls);
    for (std::size_t c = 0; c < k; ++c) {
      out.grad(b, c) = (std::exp(logp(b, c)) - (c == cls ? 1.0 : 0.0)) / static_cast<double>(batch);
    }
  }
  out.value /= static_cast<double>(batch);
  return out;
}

}  // namespace mmrl::nn
