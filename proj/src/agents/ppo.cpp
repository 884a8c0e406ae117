// SPDX-License-Identifier: Apache-2.0
#include "mmrl/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmrl/common/errors.hpp"
#include "mmrl/nn/layers.hpp"

namespace mmrl::agents {

using nn::Tensor;

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("ppo.gamma must be in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ValidationError("ppo.gae_lambda must be in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw ValidationError("ppo.clip_epsilon must be positive");
  if (rollout_length == 0) throw ValidationError("ppo.rollout_length must be positive");
  if (epochs == 0) throw ValidationError("ppo.epochs must be positive");
  if (minibatch_size == 0) throw ValidationError("ppo.minibatch_size must be positive");
  if (!(value_coeff >= 0.0) || !(entropy_coeff >= 0.0)) throw ValidationError("ppo coefficients must be >= 0");
  if (!(lr > 0.0)) throw ValidationError("ppo.lr must be positive");
  if (hidden == 0) throw ValidationError("ppo.hidden must be positive");
}

void RolloutBatch::check() const {
  const std::size_t n = states.size();
  if (actions.size() != n || rewards.size() != n || dones.size() != n || log_probs.size() != n ||
      values.size() != n || advantages.size() != n || returns.size() != n) {
    throw ValidationError("rollout batch arrays differ in length");
  }
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, const std::vector<bool>& dones,
                      double gamma, double lambda, double bootstrap_value) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ValidationError("compute_gae: length mismatch");
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (const double a : advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  for (double& a : advantages) a = sd > 0.0 ? (a - mean) / sd : a - mean;
}

double clipped_objective(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double categorical_entropy(std::span<const double> logits) {
  const Tensor lp = nn::log_softmax(Tensor({1, logits.size()}, std::vector<double>(logits.begin(), logits.end())));
  double h = 0.0;
  for (const double l : lp.data()) h -= std::exp(l) * l;
  return h;
}

int sample_categorical(std::span<const double> logits, Rng& rng) {
  const Tensor p = nn::softmax(Tensor({1, logits.size()}, std::vector<double>(logits.begin(), logits.end())));
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    cdf += p[a];
    if (u < cdf) return static_cast<int>(a);
  }
  return static_cast<int>(logits.size() - 1);
}

double PpoLossParts::total(const PpoConfig& config) const {
  return policy_loss + config.value_coeff * value_loss - config.entropy_coeff * entropy;
}

PpoMinibatchLoss ppo_minibatch_loss(const Tensor& logits, const Tensor& values, const RolloutBatch& batch,
                                    std::span<const std::size_t> indices, const PpoConfig& config) {
  const std::size_t m = indices.size();
  const std::size_t k = logits.dim(1);
  nn::require_shape(values, {m, 1}, "ppo values");
  const Tensor lp = nn::log_softmax(logits);
  PpoMinibatchLoss out{{}, Tensor({m, k}), Tensor({m, 1})};
  const double inv_m = 1.0 / static_cast<double>(m);
  double surrogate = 0.0, sq_error = 0.0, entropy = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = indices[r];
    const auto a = static_cast<std::size_t>(batch.actions[i]);
    const double adv = batch.advantages[i];
    const double ratio = std::exp(lp(r, a) - batch.log_probs[i]);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * adv;
    surrogate += std::min(unclipped, clipped);
    // d objective / d ratio: A on the unclipped branch, 0 once clipping binds.
    const double dratio = unclipped <= clipped ? adv : 0.0;

    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) h -= std::exp(lp(r, j)) * lp(r, j);
    entropy += h;

    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(lp(r, j));
      const double onehot = j == a ? 1.0 : 0.0;
      double g = -inv_m * dratio * ratio * (onehot - p);
      g += config.entropy_coeff * inv_m * p * (lp(r, j) + h);
      out.dlogits(r, j) = g;
    }
    const double err = values(r, 0) - batch.returns[i];
    sq_error += err * err;
    out.dvalues(r, 0) = config.value_coeff * 2.0 * err * inv_m;
  }
  out.parts.policy_loss = -surrogate * inv_m;
  out.parts.value_loss = sq_error * inv_m;
  out.parts.entropy = entropy * inv_m;
  return out;
}

PpoLossParts ppo_update(PolicyValueNetwork& net, RolloutBatch& batch, const PpoConfig& config, Rng& rng,
                        long& adam_step) {
  batch.check();
  for (const double a : batch.advantages) {
    if (!std::isfinite(a)) throw RuntimeFailure("ppo_update: non-finite advantage");
  }
  if (config.normalize_advantages) normalize_advantages(batch.advantages);

  const std::size_t n = batch.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  PpoLossParts mean;
  std::size_t updates = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.minibatch_size) {
      const std::size_t end = std::min(n, start + config.minibatch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<const fusion::EncodedObservation*> states;
      states.reserve(idx.size());
      for (const auto i : idx) states.push_back(&batch.states[i]);

      PolicyValueNetwork::Cache cache;
      const auto out = net.forward(net.encoder().make_batch(states), &cache);
      const auto loss = ppo_minibatch_loss(out.logits, out.values, batch, idx, config);
      if (!std::isfinite(loss.parts.total(config))) throw RuntimeFailure("ppo_update: non-finite loss");
      net.params().zero_grad();
      net.backward(cache, loss.dlogits, loss.dvalues);
      nn::adam_update(net.params(), nn::AdamConfig{config.lr}, ++adam_step);

      mean.policy_loss += loss.parts.policy_loss;
      mean.value_loss += loss.parts.value_loss;
      mean.entropy += loss.parts.entropy;
      ++updates;
    }
  }
  const double inv = 1.0 / static_cast<double>(updates);
  mean.policy_loss *= inv;
  mean.value_loss *= inv;
  mean.entropy *= inv;
  return mean;
}

}  // namespace mmrl::agents
