// SPDX-License-Identifier: Apache-2.0
//
// Episodic trajectory replay. Each step shows the agent a (visual, caption)
// observation and scores its action against the dataset's ground truth. The
// state sequence is fixed by the dataset; actions score but do not branch.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmrl/common/rng.hpp"
#include "mmrl/dataset/dataset.hpp"

namespace mmrl::env {

enum class EpisodeOrder { kSequential, kShuffled };

struct TrajectoryEnvConfig {
  double reward_correct = 1.0;
  double reward_incorrect = 0.0;
  /// Episode counts as completed when step accuracy >= threshold. In (0, 1].
  double completion_threshold = 0.8;
  EpisodeOrder order = EpisodeOrder::kSequential;
  std::uint64_t shuffle_seed = 0;
};

struct Observation {
  /// Feature vector, or planar RGB values in [0, 1] in images mode.
  std::vector<double> visual;
  std::string caption;
  std::size_t step_index = 0;
  std::size_t episode_id = 0;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool correct = false;
};

struct StepResult {
  /// Next observation; empty once the episode is done.
  std::optional<Observation> observation;
  StepOutcome outcome;
};

struct EpisodeStats {
  double cumulative_reward = 0.0;
  bool completed = false;
  double accuracy = 0.0;
};

/// Throws ValidationError for an empty outcome list.
EpisodeStats episode_stats(std::span<const StepOutcome> outcomes, double completion_threshold);

class TrajectoryEnv {
 public:
  /// `episodes` selects (and orders) dataset episodes by position; empty
  /// means all. `image_root` resolves image paths in images mode.
  TrajectoryEnv(std::shared_ptr<const dataset::Dataset> data, TrajectoryEnvConfig config,
                std::vector<std::size_t> episodes = {}, std::filesystem::path image_root = {});

  /// Moves to step 0 of the next episode in the configured order, wrapping
  /// around at the end.
  Observation reset();

  /// Throws ValidationError for an out-of-range action and RuntimeFailure
  /// when called before reset or after the episode is done.
  StepResult step(int action);

  int action_count() const { return data_->manifest.action_count; }
  std::size_t episode_count() const { return order_.size(); }
  std::size_t current_episode_length() const;
  const TrajectoryEnvConfig& config() const { return config_; }
  const dataset::Dataset& data() const { return *data_; }

  /// Image height/width of images-mode observations (0 in features mode).
  std::size_t image_height() const { return image_height_; }
  std::size_t image_width() const { return image_width_; }

 private:
  Observation observe() const;
  void reshuffle();

  std::shared_ptr<const dataset::Dataset> data_;
  TrajectoryEnvConfig config_;
  std::vector<std::size_t> episodes_;  // selection, in base order
  std::vector<std::size_t> order_;     // current pass order
  Rng shuffle_rng_;
  std::size_t cursor_ = 0;  // next position in order_
  std::optional<std::size_t> episode_;
  std::size_t step_ = 0;
  bool done_ = true;
  // images mode: planar pixels per (episode position, step)
  std::vector<std::vector<std::vector<double>>> images_;
  std::size_t image_height_ = 0;
  std::size_t image_width_ = 0;
};

/// Environment over a fresh aliased synthetic dataset with default rewards.
TrajectoryEnv make_aliased_env(int action_count, double alias_fraction, std::size_t steps, std::size_t episodes,
                               std::uint64_t seed, std::size_t feature_dim);

}  // namespace mmrl::env
