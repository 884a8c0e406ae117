// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic captioned-trajectory datasets with aliased states.
//
// Every step draws its action uniformly from [0, k). The visual feature vector
// is the action's prototype plus uniform noise in [-noise, +noise], except on
// a Bernoulli(alias_fraction) subset of steps, which get a shared "aliased"
// prototype that carries no information about the action. Captions are
// template sentences whose verb always names the correct action.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmrl/dataset/dataset.hpp"
#include "mmrl/dataset/image.hpp"

namespace mmrl::dataset {

struct SynthConfig {
  std::string name = "synthetic";
  std::size_t episode_count = 100;
  std::size_t steps_per_episode = 20;
  int action_count = 4;
  std::size_t feature_dim = 16;
  double alias_fraction = 0.5;
  /// Half-width of the uniform per-coordinate visual noise.
  double noise = 0.25;
  DatasetMode mode = DatasetMode::kFeatures;
  /// Side length of generated images in images mode.
  std::size_t image_size = 16;
};

/// Class prototypes (index = action) and the shared aliased prototype. In
/// images mode each prototype is a 3 x size x size planar image in [0, 1].
struct Prototypes {
  std::vector<std::vector<double>> classes;
  std::vector<double> aliased;
};

struct SyntheticDataset {
  Dataset data;
  Prototypes prototypes;
  /// aliased[e][t] is true when step t of episode e got the aliased prototype.
  std::vector<std::vector<bool>> aliased;
  /// Images-mode payloads keyed by ImageRef path; empty in features mode.
  std::map<std::string, RgbImage> images;
};

/// Largest supported action count (one caption verb per action).
int max_synthetic_actions();

/// Pure function of (config, seed). Throws ValidationError for
/// alias_fraction outside [0, 1], action_count < 2, or an action count with
/// no caption verb.
SyntheticDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

/// write_dataset plus the images of an images-mode dataset.
void write_synthetic(const SyntheticDataset& synth, const std::filesystem::path& root);

/// Caption verb naming the given action.
std::string_view action_verb(int action);

/// Template lookup: the action named by a caption's verb, if any.
std::optional<int> action_from_caption(std::string_view caption);

}  // namespace mmrl::dataset
