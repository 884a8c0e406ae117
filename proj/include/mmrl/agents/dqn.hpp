// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mmrl/agents/networks.hpp"
#include "mmrl/common/rng.hpp"
#include "mmrl/fusion/encoder.hpp"

namespace mmrl::agents {

enum class DqnLoss { kHuber, kMse };

struct DqnConfig {
  double gamma = 0.99;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  long target_sync_interval = 250;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  long warmup_steps = 200;
  DqnLoss loss = DqnLoss::kHuber;
  std::size_t buffer_capacity = 10000;
  std::size_t hidden = 64;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;
};

/// One experience. The state is stored as encoder input (not as a fused
/// embedding) so the encoder keeps training end to end.
struct Transition {
  fusion::EncodedObservation state;
  int action = 0;
  double reward = 0.0;
  std::optional<fusion::EncodedObservation> next_state;  // empty iff done
  bool done = false;
};

/// Fixed-capacity ring with FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Throws ValidationError unless done == !next_state.
  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// Uniform sampling with replacement.
  std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

/// Linear decay from epsilon_start to epsilon_end over the first
/// epsilon_decay_fraction * total_steps steps, then constant.
double epsilon_at(const DqnConfig& config, long global_step, long total_steps);

/// Argmax, ties to the lowest index.
int greedy_action(std::span<const double> values);

/// Epsilon-greedy action. The network is evaluated only on greedy draws.
int dqn_act(const QNetwork& qnet, const fusion::EncodedObservation& state, double epsilon, Rng& rng);

/// TD targets: r for terminal transitions, else r + gamma * max_a Q_target(s', a).
std::vector<double> dqn_targets(const QNetwork& target, std::span<const Transition* const> batch, double gamma);

/// Samples a batch, takes one Adam step (number adam_step) on the configured
/// loss between Q(s, a) and the targets, and returns the loss. Throws
/// RuntimeFailure when the buffer holds fewer than max(batch_size,
/// warmup_steps) transitions.
double dqn_update(QNetwork& qnet, const QNetwork& target, const ReplayBuffer& buffer, const DqnConfig& config,
                  Rng& rng, long adam_step);

/// target <- online, exactly.
void target_sync(const QNetwork& online, QNetwork& target);

}  // namespace mmrl::agents
