// SPDX-License-Identifier: Apache-2.0
#include "mmrl/agents/trainer.hpp"

#include <cmath>
#include <functional>

#include "mmrl/common/errors.hpp"
#include "mmrl/nn/layers.hpp"

namespace mmrl::agents {

using nn::Tensor;

fusion::EncodedObservation ObservationEncoder::operator()(const env::Observation& obs) const {
  return {obs.visual, fusion::encode_caption(*vocab_, obs.caption, max_caption_len_)};
}

namespace {

EpisodeResult summarize(const std::vector<env::StepOutcome>& outcomes, const env::TrajectoryEnv& env) {
  const auto stats = env::episode_stats(outcomes, env.config().completion_threshold);
  return {stats.cumulative_reward, stats.accuracy, stats.completed};
}

using Policy = std::function<int(const fusion::EncodedObservation&)>;

std::vector<EpisodeResult> evaluate(env::TrajectoryEnv& env, const ObservationEncoder& encode, std::size_t episodes,
                                    const Policy& policy) {
  std::vector<EpisodeResult> out;
  out.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    auto obs = env.reset();
    std::vector<env::StepOutcome> outcomes;
    for (;;) {
      const auto result = env.step(policy(encode(obs)));
      outcomes.push_back(result.outcome);
      if (result.outcome.done) break;
      obs = *result.observation;
    }
    out.push_back(summarize(outcomes, env));
  }
  return out;
}

}  // namespace

std::vector<EpisodeResult> evaluate_dqn(const QNetwork& qnet, env::TrajectoryEnv& env,
                                        const ObservationEncoder& encode, std::size_t episodes) {
  Rng unused(0);
  return evaluate(env, encode, episodes,
                  [&](const fusion::EncodedObservation& s) { return dqn_act(qnet, s, 0.0, unused); });
}

std::vector<EpisodeResult> evaluate_ppo(const PolicyValueNetwork& net, env::TrajectoryEnv& env,
                                        const ObservationEncoder& encode, std::size_t episodes) {
  return evaluate(env, encode, episodes, [&](const fusion::EncodedObservation& s) {
    const fusion::EncodedObservation* one[] = {&s};
    const auto out = net.forward(net.encoder().make_batch(one), nullptr);
    return greedy_action(out.logits.data());
  });
}

TrainingRun run_dqn(QNetwork& qnet, env::TrajectoryEnv& train_env, env::TrajectoryEnv& eval_env,
                    const ObservationEncoder& encode, const DqnConfig& config, const RunBudget& budget, Rng& rng) {
  config.validate();
  TrainingRun run;
  QNetwork target = qnet;
  ReplayBuffer buffer(config.buffer_capacity);
  const auto ready = std::max<std::size_t>(config.batch_size, static_cast<std::size_t>(config.warmup_steps));
  long global_step = 0;
  long adam_step = 0;
  long total_steps = 0;

  for (std::size_t episode = 0; episode < budget.training_episodes; ++episode) {
    auto obs = train_env.reset();
    if (episode == 0) {
      // Schedule length assumes every training episode is as long as the first.
      total_steps = static_cast<long>(train_env.current_episode_length() * budget.training_episodes);
    }
    auto state = encode(obs);
    std::vector<env::StepOutcome> outcomes;
    for (;;) {
      const double epsilon = epsilon_at(config, global_step, total_steps);
      const int action = dqn_act(qnet, state, epsilon, rng);
      auto result = train_env.step(action);
      outcomes.push_back(result.outcome);
      Transition t;
      t.state = state;
      t.action = action;
      t.reward = result.outcome.reward;
      t.done = result.outcome.done;
      if (!t.done) {
        state = encode(*result.observation);
        t.next_state = state;
      }
      buffer.push(std::move(t));
      ++global_step;

      if (buffer.size() >= ready) {
        const double loss = dqn_update(qnet, target, buffer, config, rng, ++adam_step);
        run.log.push_back({global_step, loss, epsilon});
      }
      if (global_step % config.target_sync_interval == 0) target_sync(qnet, target);
      if (result.outcome.done) break;
    }
    run.train.push_back(summarize(outcomes, train_env));
  }
  run.eval = evaluate_dqn(qnet, eval_env, encode, budget.eval_episodes);
  return run;
}

TrainingRun run_ppo(PolicyValueNetwork& net, env::TrajectoryEnv& train_env, env::TrajectoryEnv& eval_env,
                    const ObservationEncoder& encode, const PpoConfig& config, const RunBudget& budget, Rng& rng) {
  config.validate();
  TrainingRun run;
  RolloutBatch batch;
  long global_step = 0;
  long adam_step = 0;

  const auto policy_step = [&](const fusion::EncodedObservation& s, double* log_prob, double* value) {
    const fusion::EncodedObservation* one[] = {&s};
    const auto out = net.forward(net.encoder().make_batch(one), nullptr);
    const int action = sample_categorical(out.logits.data(), rng);
    const Tensor lp = nn::log_softmax(out.logits);
    *log_prob = lp[static_cast<std::size_t>(action)];
    *value = out.values[0];
    return action;
  };

  const auto update = [&](const fusion::EncodedObservation* bootstrap_state) {
    double bootstrap = 0.0;
    if (bootstrap_state != nullptr) {
      const fusion::EncodedObservation* one[] = {bootstrap_state};
      bootstrap = net.forward(net.encoder().make_batch(one), nullptr).values[0];
    }
    auto gae = compute_gae(batch.rewards, batch.values, batch.dones, config.gamma, config.gae_lambda, bootstrap);
    batch.advantages = std::move(gae.advantages);
    batch.returns = std::move(gae.returns);
    const auto parts = ppo_update(net, batch, config, rng, adam_step);
    run.log.push_back({global_step, parts.total(config), parts.entropy});
    batch = RolloutBatch{};
  };

  for (std::size_t episode = 0; episode < budget.training_episodes; ++episode) {
    auto state = encode(train_env.reset());
    std::vector<env::StepOutcome> outcomes;
    for (;;) {
      double log_prob = 0.0, value = 0.0;
      const int action = policy_step(state, &log_prob, &value);
      auto result = train_env.step(action);
      outcomes.push_back(result.outcome);
      batch.states.push_back(std::move(state));
      batch.actions.push_back(action);
      batch.rewards.push_back(result.outcome.reward);
      batch.dones.push_back(result.outcome.done);
      batch.log_probs.push_back(log_prob);
      batch.values.push_back(value);
      ++global_step;
      if (!result.outcome.done) state = encode(*result.observation);
      if (batch.size() == config.rollout_length) update(result.outcome.done ? nullptr : &state);
      if (result.outcome.done) break;
    }
    run.train.push_back(summarize(outcomes, train_env));
  }
  // Episodes end on done, so a trailing rollout never needs a bootstrap.
  if (batch.size() > 0) update(nullptr);
  run.eval = evaluate_ppo(net, eval_env, encode, budget.eval_episodes);
  return run;
}

}  // namespace mmrl::agents
