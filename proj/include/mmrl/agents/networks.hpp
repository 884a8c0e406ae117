// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "mmrl/common/rng.hpp"
#include "mmrl/fusion/encoder.hpp"
#include "mmrl/nn/layers.hpp"
#include "mmrl/nn/parameters.hpp"

namespace mmrl::agents {

/// Fusion encoder followed by linear(fused->hidden) / relu / linear(hidden->k).
/// Owns its parameters; copying the network copies its full state.
class QNetwork {
 public:
  struct Cache {
    fusion::EncoderCache encoder;
    nn::Tensor fused;
    nn::Tensor hidden_pre;
  };

  QNetwork(const fusion::EncoderConfig& encoder, const fusion::VisualSpec& visual, std::size_t vocab_size,
           int action_count, std::size_t hidden, Rng& rng);

  /// Q-values [batch, k].
  nn::Tensor forward(const fusion::EncoderInput& input, Cache* cache) const;
  /// Accumulates parameter gradients for dL/dQ.
  void backward(const Cache& cache, const nn::Tensor& dq);

  const fusion::FusionEncoder& encoder() const { return encoder_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  int action_count() const { return action_count_; }

 private:
  nn::ParameterSet params_;
  fusion::FusionEncoder encoder_;
  nn::Linear hidden_;
  nn::Linear head_;
  int action_count_ = 0;
};

/// Fusion encoder and a shared relu trunk feeding a categorical policy head
/// (logits [batch, k]) and a scalar value head.
class PolicyValueNetwork {
 public:
  struct Cache {
    fusion::EncoderCache encoder;
    nn::Tensor fused;
    nn::Tensor trunk_pre;
  };
  struct Output {
    nn::Tensor logits;  // [batch, k]
    nn::Tensor values;  // [batch, 1]
  };

  PolicyValueNetwork(const fusion::EncoderConfig& encoder, const fusion::VisualSpec& visual, std::size_t vocab_size,
                     int action_count, std::size_t hidden, Rng& rng);

  Output forward(const fusion::EncoderInput& input, Cache* cache) const;
  void backward(const Cache& cache, const nn::Tensor& dlogits, const nn::Tensor& dvalues);

  const fusion::FusionEncoder& encoder() const { return encoder_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  int action_count() const { return action_count_; }

 private:
  nn::ParameterSet params_;
  fusion::FusionEncoder encoder_;
  nn::Linear trunk_;
  nn::Linear policy_head_;
  nn::Linear value_head_;
  int action_count_ = 0;
};

}  // namespace mmrl::agents
