// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmrl/agents/networks.hpp"
#include "mmrl/common/rng.hpp"
#include "mmrl/fusion/encoder.hpp"

namespace mmrl::agents {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  std::size_t rollout_length = 256;
  std::size_t epochs = 8;
  std::size_t minibatch_size = 64;
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;
  double lr = 2e-3;
  bool normalize_advantages = true;
  std::size_t hidden = 64;

  void validate() const;
};

struct RolloutBatch {
  std::vector<fusion::EncodedObservation> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return states.size(); }
  /// Throws ValidationError when the arrays differ in length.
  void check() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t) and
/// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}. V(s_T) is
/// bootstrap_value. Throws ValidationError on length mismatch.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, const std::vector<bool>& dones,
                      double gamma, double lambda, double bootstrap_value);

/// In-place shift to mean 0 and scale to (population) std 1. Constant
/// inputs are only centred.
void normalize_advantages(std::span<double> advantages);

/// Per-sample min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
double clipped_objective(double ratio, double advantage, double clip_epsilon);

/// Entropy of softmax(logits).
double categorical_entropy(std::span<const double> logits);

/// Draws from softmax(logits) by inverse CDF with one uniform draw.
int sample_categorical(std::span<const double> logits, Rng& rng);

/// Unweighted terms: policy_loss = -mean(clipped objective), value_loss =
/// mse(V, returns), entropy = mean policy entropy.
struct PpoLossParts {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  /// policy_loss + value_coeff * value_loss - entropy_coeff * entropy.
  double total(const PpoConfig& config) const;
};

/// Loss on batch rows `indices` and its gradients w.r.t. logits and values.
struct PpoMinibatchLoss {
  PpoLossParts parts;
  nn::Tensor dlogits;  // [m, k]
  nn::Tensor dvalues;  // [m, 1]
};

PpoMinibatchLoss ppo_minibatch_loss(const nn::Tensor& logits, const nn::Tensor& values, const RolloutBatch& batch,
                                    std::span<const std::size_t> indices, const PpoConfig& config);

/// Normalizes advantages (when enabled), then runs epochs x minibatches of
/// Adam steps. adam_step is advanced once per minibatch. Returns the losses
/// averaged over all minibatches. Throws RuntimeFailure on a non-finite
/// advantage or loss.
PpoLossParts ppo_update(PolicyValueNetwork& net, RolloutBatch& batch, const PpoConfig& config, Rng& rng,
                        long& adam_step);

}  // namespace mmrl::agents
