// SPDX-License-Identifier: Apache-2.0
#include "mmrl/agents/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "mmrl/common/errors.hpp"
#include "mmrl/nn/losses.hpp"

namespace mmrl::agents {

using nn::Tensor;

void DqnConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("dqn.gamma must be in [0, 1)");
  if (!(lr > 0.0)) throw ValidationError("dqn.lr must be positive");
  if (batch_size == 0) throw ValidationError("dqn.batch_size must be positive");
  if (target_sync_interval <= 0) throw ValidationError("dqn.target_sync_interval must be positive");
  if (!(epsilon_end <= epsilon_start)) throw ValidationError("dqn.epsilon_end must be <= epsilon_start");
  if (!(epsilon_start <= 1.0 && epsilon_end >= 0.0)) throw ValidationError("dqn epsilons must be in [0, 1]");
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ValidationError("dqn.epsilon_decay_fraction must be in (0, 1]");
  }
  if (warmup_steps < 0) throw ValidationError("dqn.warmup_steps must be non-negative");
  if (buffer_capacity == 0) throw ValidationError("dqn.buffer_capacity must be positive");
  if (hidden == 0) throw ValidationError("dqn.hidden must be positive");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
  ring_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (t.done == t.next_state.has_value()) {
    throw ValidationError("transition: done must hold exactly when next_state is terminal");
  }
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ValidationError("replay buffer index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : next_;
  return ring_[(oldest + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (size_ == 0) throw RuntimeFailure("cannot sample from an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(&ring_[rng.uniform_index(size_)]);
  return out;
}

double epsilon_at(const DqnConfig& config, long global_step, long total_steps) {
  if (total_steps <= 0) throw ValidationError("epsilon_at: total_steps must be positive");
  const double decay_steps = config.epsilon_decay_fraction * static_cast<double>(total_steps);
  const double progress = std::clamp(static_cast<double>(global_step) / decay_steps, 0.0, 1.0);
  if (progress >= 1.0) return config.epsilon_end;
  return config.epsilon_start + progress * (config.epsilon_end - config.epsilon_start);
}

int greedy_action(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

int dqn_act(const QNetwork& qnet, const fusion::EncodedObservation& state, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<int>(rng.uniform_index(static_cast<std::size_t>(qnet.action_count())));
  }
  const fusion::EncodedObservation* one[] = {&state};
  const Tensor q = qnet.forward(qnet.encoder().make_batch(one), nullptr);
  return greedy_action(q.data());
}

std::vector<double> dqn_targets(const QNetwork& target, std::span<const Transition* const> batch, double gamma) {
  std::vector<double> y(batch.size());
  std::vector<const fusion::EncodedObservation*> next;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = batch[i]->reward;
    if (!batch[i]->done && gamma != 0.0) {
      next.push_back(&*batch[i]->next_state);
      rows.push_back(i);
    }
  }
  if (!next.empty()) {
    const Tensor q_next = target.forward(target.encoder().make_batch(next), nullptr);
    const std::size_t k = q_next.dim(1);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      double best = q_next(j, 0);
      for (std::size_t a = 1; a < k; ++a) best = std::max(best, q_next(j, a));
      y[rows[j]] += gamma * best;
    }
  }
  return y;
}

double dqn_update(QNetwork& qnet, const QNetwork& target, const ReplayBuffer& buffer, const DqnConfig& config,
                  Rng& rng, long adam_step) {
  const auto required = std::max<std::size_t>(config.batch_size, static_cast<std::size_t>(config.warmup_steps));
  if (buffer.size() < required) {
    throw RuntimeFailure("dqn_update: buffer holds " + std::to_string(buffer.size()) + " transitions, needs " +
                         std::to_string(required));
  }
  const auto batch = buffer.sample(config.batch_size, rng);
  const std::vector<double> y = dqn_targets(target, batch, config.gamma);

  std::vector<const fusion::EncodedObservation*> states;
  states.reserve(batch.size());
  for (const auto* t : batch) states.push_back(&t->state);
  QNetwork::Cache cache;
  const Tensor q = qnet.forward(qnet.encoder().make_batch(states), &cache);

  const std::size_t n = batch.size();
  Tensor chosen({n}), targets({n}, std::vector<double>(y));
  for (std::size_t i = 0; i < n; ++i) chosen[i] = q(i, static_cast<std::size_t>(batch[i]->action));
  const nn::LossResult loss =
      config.loss == DqnLoss::kHuber ? nn::huber_loss(chosen, targets, 1.0) : nn::mse_loss(chosen, targets);
  if (!std::isfinite(loss.value)) throw RuntimeFailure("dqn_update: non-finite loss");

  Tensor dq(q.shape());
  for (std::size_t i = 0; i < n; ++i) dq(i, static_cast<std::size_t>(batch[i]->action)) = loss.grad[i];
  qnet.params().zero_grad();
  qnet.backward(cache, dq);
  nn::adam_update(qnet.params(), nn::AdamConfig{config.lr}, adam_step);
  return loss.value;
}

void target_sync(const QNetwork& online, QNetwork& target) { target.params().copy_values_from(online.params()); }

}  // namespace mmrl::agents
