// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mmrl/common/rng.hpp"
#include "mmrl/nn/parameters.hpp"
#include "mmrl/nn/tensor.hpp"

namespace mmrl::nn {

/// Intermediate values of one GRU step needed by its backward.
struct GruStepCache {
  Tensor x;
  Tensor h_prev;
  Tensor reset;      // r
  Tensor update;     // z
  Tensor candidate;  // n
  Tensor hidden_n;   // h_prev W_hn + b_hn
};

/// Gated recurrent unit, gates laid out [reset | update | candidate]:
///   r  = sigmoid(x W_xr + b_xr + h W_hr + b_hr)
///   z  = sigmoid(x W_xz + b_xz + h W_hz + b_hz)
///   n  = tanh(x W_xn + b_xn + r * (h W_hn + b_hn))
///   h' = (1 - z) * n + z * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterSet& params, const std::string& name, std::size_t input_size, std::size_t hidden_size, Rng& rng);

  /// x [batch, input], h_prev [batch, hidden] -> h [batch, hidden]. Cache may be null.
  Tensor step(const ParameterSet& params, const Tensor& x, const Tensor& h_prev, GruStepCache* cache) const;

  /// Given dL/dh for this step, accumulates parameter gradients and returns
  /// (dL/dx, dL/dh_prev).
  std::pair<Tensor, Tensor> step_backward(ParameterSet& params, const GruStepCache& cache, const Tensor& dh) const;

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }
  ParamId input_weight() const { return w_x_; }
  ParamId hidden_weight() const { return w_h_; }
  ParamId input_bias() const { return b_x_; }
  ParamId hidden_bias() const { return b_h_; }

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
  ParamId w_x_ = 0;
  ParamId w_h_ = 0;
  ParamId b_x_ = 0;
  ParamId b_h_ = 0;
};

}  // namespace mmrl::nn
