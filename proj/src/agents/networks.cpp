// SPDX-License-Identifier: Apache-2.0
#include "mmrl/agents/networks.hpp"

#include "mmrl/common/errors.hpp"

namespace mmrl::agents {

using nn::Tensor;

QNetwork::QNetwork(const fusion::EncoderConfig& encoder, const fusion::VisualSpec& visual, std::size_t vocab_size,
                   int action_count, std::size_t hidden, Rng& rng)
    : action_count_(action_count) {
  if (action_count < 2) throw ValidationError("QNetwork: action_count must be >= 2");
  encoder_ = fusion::FusionEncoder(params_, encoder, visual, vocab_size, rng);
  hidden_ = nn::Linear(params_, "q.hidden", encoder.fused_dim(), hidden, rng);
  head_ = nn::Linear(params_, "q.head", hidden, static_cast<std::size_t>(action_count), rng);
}

Tensor QNetwork::forward(const fusion::EncoderInput& input, Cache* cache) const {
  Tensor fused = encoder_.forward(params_, input, cache != nullptr ? &cache->encoder : nullptr);
  Tensor hidden_pre = hidden_.forward(params_, fused);
  Tensor q = head_.forward(params_, nn::relu(hidden_pre));
  if (cache != nullptr) {
    cache->fused = std::move(fused);
    cache->hidden_pre = std::move(hidden_pre);
  }
  return q;
}

void QNetwork::backward(const Cache& cache, const Tensor& dq) {
  const Tensor dh = head_.backward(params_, nn::relu(cache.hidden_pre), dq);
  const Tensor dfused = hidden_.backward(params_, cache.fused, nn::relu_backward(cache.hidden_pre, dh));
  encoder_.backward(params_, cache.encoder, dfused);
}

PolicyValueNetwork::PolicyValueNetwork(const fusion::EncoderConfig& encoder, const fusion::VisualSpec& visual,
                                       std::size_t vocab_size, int action_count, std::size_t hidden, Rng& rng)
    : action_count_(action_count) {
  if (action_count < 2) throw ValidationError("PolicyValueNetwork: action_count must be >= 2");
  encoder_ = fusion::FusionEncoder(params_, encoder, visual, vocab_size, rng);
  trunk_ = nn::Linear(params_, "pv.trunk", encoder.fused_dim(), hidden, rng);
  policy_head_ = nn::Linear(params_, "pv.policy", hidden, static_cast<std::size_t>(action_count), rng);
  value_head_ = nn::Linear(params_, "pv.value", hidden, 1, rng);
}

PolicyValueNetwork::Output PolicyValueNetwork::forward(const fusion::EncoderInput& input, Cache* cache) const {
  Tensor fused = encoder_.forward(params_, input, cache != nullptr ? &cache->encoder : nullptr);
  Tensor trunk_pre = trunk_.forward(params_, fused);
  const Tensor trunk = nn::relu(trunk_pre);
  Output out{policy_head_.forward(params_, trunk), value_head_.forward(params_, trunk)};
  if (cache != nullptr) {
    cache->fused = std::move(fused);
    cache->trunk_pre = std::move(trunk_pre);
  }
  return out;
}

void PolicyValueNetwork::backward(const Cache& cache, const Tensor& dlogits, const Tensor& dvalues) {
  const Tensor trunk = nn::relu(cache.trunk_pre);
  Tensor dtrunk = policy_head_.backward(params_, trunk, dlogits);
  nn::add_inplace(dtrunk, value_head_.backward(params_, trunk, dvalues));
  const Tensor dfused = trunk_.backward(params_, cache.fused, nn::relu_backward(cache.trunk_pre, dtrunk));
  encoder_.backward(params_, cache.encoder, dfused);
}

}  // namespace mmrl::agents
