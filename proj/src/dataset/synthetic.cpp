// SPDX-License-Identifier: Apache-2.0
#include "mmrl/dataset/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/common/rng.hpp"
#include "mmrl/textmetrics/metrics.hpp"

namespace fs = std::filesystem;

namespace mmrl::dataset {
namespace {

constexpr std::array<std::string_view, 16> kVerbs = {
    "grasps", "places", "pushes", "opens",  "closes", "rotates", "lifts",   "wipes",
    "pours",  "stacks", "slides", "flips",  "presses", "drops",  "shakes", "sweeps"};
constexpr std::array<std::string_view, 8> kColors = {"red",   "blue",  "green",  "yellow",
                                                     "white", "black", "orange", "purple"};
constexpr std::array<std::string_view, 10> kObjects = {"block", "cup",    "bowl",   "spoon",  "pot",
                                                       "lid",   "towel",  "drawer", "bottle", "sponge"};
constexpr std::array<std::string_view, 6> kPlaces = {"table", "counter", "sink", "stove", "shelf", "tray"};
constexpr std::array<std::string_view, 5> kAdverbs = {"slowly", "carefully", "quickly", "gently", "firmly"};

template <std::size_t N>
std::string pick(const std::array<std::string_view, N>& words, Rng& rng) {
  return std::string(words[rng.uniform_index(N)]);
}

std::string make_caption(int action, std::size_t step_index, Rng& rng) {
  const std::string verb(kVerbs[static_cast<std::size_t>(action)]);
  switch (rng.uniform_index(4)) {
    case 0:
      return "The robot " + verb + " the " + pick(kColors, rng) + " " + pick(kObjects, rng) + ".";
    case 1: {
      const std::string adverb = pick(kAdverbs, rng);
      const std::string object = pick(kObjects, rng);
      return "The robot arm " + adverb + " " + verb + " the " + object + " on the " + pick(kPlaces, rng) + ".";
    }
    case 2: {
      const std::string color = pick(kColors, rng);
      const std::string object = pick(kObjects, rng);
      return "Next, the gripper " + verb + " the " + color + " " + object + " near the " + pick(kPlaces, rng) + ".";
    }
    default:
      return "Step " + std::to_string(step_index + 1) + ": the robot " + verb + " the " + pick(kObjects, rng) + ".";
  }
}

double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Prototypes draw_feature_prototypes(const SynthConfig& config, Rng& rng) {
  // Boxes of half-width `noise` around distinct prototypes must not overlap,
  // so a visual-only classifier can be exact on non-aliased steps.
  const double min_gap = 2.0 * config.noise + 1e-6;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Prototypes p;
    const auto draw = [&] {
      std::vector<double> v(config.feature_dim);
      for (auto& x : v) x = rng.normal();
      return v;
    };
    for (int c = 0; c < config.action_count; ++c) p.classes.push_back(draw());
    p.aliased = draw();
    std::vector<const std::vector<double>*> all;
    for (const auto& c : p.classes) all.push_back(&c);
    all.push_back(&p.aliased);
    bool separated = true;
    for (std::size_t i = 0; i < all.size() && separated; ++i) {
      for (std::size_t j = i + 1; j < all.size() && separated; ++j) {
        separated = linf_distance(*all[i], *all[j]) > min_gap;
      }
    }
    if (separated) return p;
  }
  throw ValidationError("synthetic: feature_dim too small to separate the prototypes at this noise level");
}

Prototypes draw_image_prototypes(const SynthConfig& config, Rng& rng) {
  const std::size_t n = 3 * config.image_size * config.image_size;
  Prototypes p;
  const auto draw = [&] {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(0.2, 0.8);
    return v;
  };
  for (int c = 0; c < config.action_count; ++c) p.classes.push_back(draw());
  p.aliased = draw();
  return p;
}

RgbImage render_image(const std::vector<double>& prototype, std::size_t size, double noise, Rng& rng) {
  RgbImage img;
  img.width = size;
  img.height = size;
  img.pixels.resize(size * size * 3);
  const std::size_t plane = size * size;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = std::clamp(prototype[ch * plane + i] + rng.uniform(-noise, noise), 0.0, 1.0);
      img.pixels[i * 3 + ch] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return img;
}

}  // namespace

int max_synthetic_actions() { return static_cast<int>(kVerbs.size()); }

std::string_view action_verb(int action) { return kVerbs.at(static_cast<std::size_t>(action)); }

std::optional<int> action_from_caption(std::string_view caption) {
  for (const auto& token : textmetrics::tokenize_for_metrics(caption)) {
    const auto it = std::find(kVerbs.begin(), kVerbs.end(), token);
    if (it != kVerbs.end()) return static_cast<int>(it - kVerbs.begin());
  }
  return std::nullopt;
}

SyntheticDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  if (!(config.alias_fraction >= 0.0 && config.alias_fraction <= 1.0)) {
    throw ValidationError("synthetic: alias_fraction must be in [0, 1]");
  }
  if (config.action_count < 2) throw ValidationError("synthetic: action_count must be >= 2");
  if (config.action_count > max_synthetic_actions()) {
    throw ValidationError("synthetic: at most " + std::to_string(max_synthetic_actions()) + " actions supported");
  }
  if (config.episode_count == 0 || config.steps_per_episode == 0) {
    throw ValidationError("synthetic: episode_count and steps_per_episode must be positive");
  }
  if (!(config.noise >= 0.0)) throw ValidationError("synthetic: noise must be non-negative");
  const bool images = config.mode == DatasetMode::kImages;
  if (!images && config.feature_dim == 0) throw ValidationError("synthetic: feature_dim must be positive");
  if (images && config.image_size < 8) throw ValidationError("synthetic: image_size must be >= 8");

  Rng rng(seed);
  SyntheticDataset out;
  out.prototypes = images ? draw_image_prototypes(config, rng) : draw_feature_prototypes(config, rng);

  auto& m = out.data.manifest;
  m.name = config.name;
  m.episode_count = config.episode_count;
  m.action_count = config.action_count;
  m.feature_dim = images ? 0 : config.feature_dim;
  m.mode = config.mode;
  m.seed = seed;

  const auto k = static_cast<std::size_t>(config.action_count);
  for (std::size_t e = 0; e < config.episode_count; ++e) {
    EpisodeRecord episode;
    episode.episode_id = e;
    std::vector<bool> alias_mask;
    for (std::size_t t = 0; t < config.steps_per_episode; ++t) {
      StepRecord step;
      step.step_index = t;
      step.action = static_cast<int>(rng.uniform_index(k));
      const bool aliased = rng.bernoulli(config.alias_fraction);
      alias_mask.push_back(aliased);
      const auto& prototype = aliased ? out.prototypes.aliased : out.prototypes.classes[static_cast<std::size_t>(step.action)];
      if (images) {
        std::array<char, 48> name{};
        std::snprintf(name.data(), name.size(), "images/ep%04zu_s%03zu.png", e, t);
        out.images[name.data()] = render_image(prototype, config.image_size, config.noise, rng);
        step.visual = ImageRef{name.data()};
      } else {
        std::vector<double> v(prototype.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = quantize_real(prototype[i] + rng.uniform(-config.noise, config.noise));
        }
        step.visual = std::move(v);
      }
      step.caption = make_caption(step.action, t, rng);
      episode.steps.push_back(std::move(step));
    }
    out.data.episodes.push_back(std::move(episode));
    out.aliased.push_back(std::move(alias_mask));
  }
  return out;
}

void write_synthetic(const SyntheticDataset& synth, const fs::path& root) {
  write_dataset(synth.data, root);
  for (const auto& [rel, image] : synth.images) write_png(root / rel, image);
}

}  // namespace mmrl::dataset
