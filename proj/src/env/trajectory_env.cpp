// SPDX-License-Identifier: Apache-2.0
#include "mmrl/env/trajectory_env.hpp"

#include <numeric>

#include "mmrl/common/errors.hpp"
#include "mmrl/dataset/image.hpp"
#include "mmrl/dataset/synthetic.hpp"

namespace mmrl::env {

EpisodeStats episode_stats(std::span<const StepOutcome> outcomes, double completion_threshold) {
  if (outcomes.empty()) throw ValidationError("episode_stats: empty outcome list");
  EpisodeStats stats;
  std::size_t correct = 0;
  for (const auto& o : outcomes) {
    stats.cumulative_reward += o.reward;
    if (o.correct) ++correct;
  }
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(outcomes.size());
  stats.completed = stats.accuracy >= completion_threshold;
  return stats;
}

TrajectoryEnv::TrajectoryEnv(std::shared_ptr<const dataset::Dataset> data, TrajectoryEnvConfig config,
                             std::vector<std::size_t> episodes, std::filesystem::path image_root)
    : data_(std::move(data)), config_(config), episodes_(std::move(episodes)), shuffle_rng_(config.shuffle_seed) {
  if (!data_ || data_->episodes.empty()) throw ValidationError("environment: empty dataset");
  if (!(config_.completion_threshold > 0.0 && config_.completion_threshold <= 1.0)) {
    throw ValidationError("environment: completion_threshold must be in (0, 1]");
  }
  if (episodes_.empty()) {
    episodes_.resize(data_->episodes.size());
    std::iota(episodes_.begin(), episodes_.end(), std::size_t{0});
  }
  for (const auto e : episodes_) {
    if (e >= data_->episodes.size()) throw ValidationError("environment: episode selection out of range");
  }
  order_ = episodes_;

  if (data_->manifest.mode == dataset::DatasetMode::kImages) {
    images_.resize(data_->episodes.size());
    for (const auto e : episodes_) {
      if (!images_[e].empty()) continue;
      for (const auto& step : data_->episodes[e].steps) {
        const auto img = dataset::read_png(image_root / std::get<dataset::ImageRef>(step.visual).path);
        if (image_height_ == 0) {
          image_height_ = img.height;
          image_width_ = img.width;
        } else if (img.height != image_height_ || img.width != image_width_) {
          throw ValidationError("environment: all images must share one size");
        }
        const std::size_t plane = img.width * img.height;
        std::vector<double> planar(3 * plane);
        for (std::size_t i = 0; i < plane; ++i) {
          for (std::size_t c = 0; c < 3; ++c) planar[c * plane + i] = img.pixels[i * 3 + c] / 255.0;
        }
        images_[e].push_back(std::move(planar));
      }
    }
  }
}

void TrajectoryEnv::reshuffle() {
  order_ = episodes_;
  shuffle_rng_.shuffle(std::span<std::size_t>(order_));
}

Observation TrajectoryEnv::reset() {
  if (cursor_ == 0 && config_.order == EpisodeOrder::kShuffled) reshuffle();
  episode_ = order_[cursor_];
  cursor_ = (cursor_ + 1) % order_.size();
  step_ = 0;
  done_ = false;
  return observe();
}

std::size_t TrajectoryEnv::current_episode_length() const {
  if (!episode_) throw RuntimeFailure("environment: no current episode");
  return data_->episodes[*episode_].steps.size();
}

Observation TrajectoryEnv::observe() const {
  const auto& episode = data_->episodes[*episode_];
  const auto& record = episode.steps[step_];
  Observation obs;
  if (const auto* features = std::get_if<std::vector<double>>(&record.visual)) {
    obs.visual = *features;
  } else {
    obs.visual = images_[*episode_][step_];
  }
  obs.caption = record.caption;
  obs.step_index = record.step_index;
  obs.episode_id = episode.episode_id;
  return obs;
}

StepResult TrajectoryEnv::step(int action) {
  if (action < 0 || action >= action_count()) {
    throw ValidationError("environment: action " + std::to_string(action) + " out of range [0, " +
                          std::to_string(action_count()) + ")");
  }
  if (done_ || !episode_) throw RuntimeFailure("environment: step called without an active episode; call reset");
  const auto& steps = data_->episodes[*episode_].steps;
  StepResult result;
  result.outcome.correct = action == steps[step_].action;
  result.outcome.reward = result.outcome.correct ? config_.reward_correct : config_.reward_incorrect;
  ++step_;
  if (step_ == steps.size()) {
    done_ = true;
    result.outcome.done = true;
  } else {
    result.observation = observe();
  }
  return result;
}

TrajectoryEnv make_aliased_env(int action_count, double alias_fraction, std::size_t steps, std::size_t episodes,
                               std::uint64_t seed, std::size_t feature_dim) {
  dataset::SynthConfig synth;
  synth.name = "aliased";
  synth.action_count = action_count;
  synth.alias_fraction = alias_fraction;
  synth.steps_per_episode = steps;
  synth.episode_count = episodes;
  synth.feature_dim = feature_dim;
  auto generated = dataset::generate_synthetic(synth, seed);
  return TrajectoryEnv(std::make_shared<const dataset::Dataset>(std::move(generated.data)), TrajectoryEnvConfig{});
}

}  // namespace mmrl::env
