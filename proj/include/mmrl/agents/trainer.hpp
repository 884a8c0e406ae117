// SPDX-License-Identifier: Apache-2.0
//
// Episode loops for both agents. Training and evaluation use separate
// environments; evaluation runs without exploration.
#pragma once

#include <cstddef>
#include <vector>

#include "mmrl/agents/dqn.hpp"
#include "mmrl/agents/networks.hpp"
#include "mmrl/agents/ppo.hpp"
#include "mmrl/common/rng.hpp"
#include "mmrl/env/trajectory_env.hpp"
#include "mmrl/fusion/vocabulary.hpp"

namespace mmrl::agents {

/// Maps environment observations to encoder inputs.
class ObservationEncoder {
 public:
  ObservationEncoder(const fusion::Vocabulary& vocab, std::size_t max_caption_len)
      : vocab_(&vocab), max_caption_len_(max_caption_len) {}
  fusion::EncodedObservation operator()(const env::Observation& obs) const;

 private:
  const fusion::Vocabulary* vocab_;
  std::size_t max_caption_len_;
};

struct EpisodeResult {
  double cumulative_reward = 0.0;
  double accuracy = 0.0;
  bool completed = false;
};

/// One row of the training log. `aux` is epsilon for DQN, policy entropy for PPO.
struct TrainLogRow {
  long step = 0;
  double loss = 0.0;
  double aux = 0.0;
};

struct TrainingRun {
  std::vector<EpisodeResult> train;
  std::vector<EpisodeResult> eval;
  std::vector<TrainLogRow> log;
};

struct RunBudget {
  std::size_t training_episodes = 200;
  std::size_t eval_episodes = 20;
};

/// Epsilon-greedy DQN with replay and a periodically synced target network.
/// One update per environment step once the buffer is warm.
TrainingRun run_dqn(QNetwork& qnet, env::TrajectoryEnv& train_env, env::TrajectoryEnv& eval_env,
                    const ObservationEncoder& encode, const DqnConfig& config, const RunBudget& budget, Rng& rng);

/// PPO over fixed-length rollouts that may span episode boundaries; a
/// trailing partial rollout is used for one last update.
TrainingRun run_ppo(PolicyValueNetwork& net, env::TrajectoryEnv& train_env, env::TrajectoryEnv& eval_env,
                    const ObservationEncoder& encode, const PpoConfig& config, const RunBudget& budget, Rng& rng);

/// Greedy evaluation episodes.
std::vector<EpisodeResult> evaluate_dqn(const QNetwork& qnet, env::TrajectoryEnv& env,
                                        const ObservationEncoder& encode, std::size_t episodes);
std::vector<EpisodeResult> evaluate_ppo(const PolicyValueNetwork& net, env::TrajectoryEnv& env,
                                        const ObservationEncoder& encode, std::size_t episodes);

}  // namespace mmrl::agents
