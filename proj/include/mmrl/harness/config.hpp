// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: one INI file with a section per module
// ([experiment], [dataset], [synth], [env], [encoder], [dqn], [ppo]) plus
// "section.key=value" overrides. Every key has a default except
// experiment.seed, which must be given.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/agents/dqn.hpp"
#include "mmrl/agents/ppo.hpp"
#include "mmrl/dataset/synthetic.hpp"
#include "mmrl/env/trajectory_env.hpp"
#include "mmrl/fusion/encoder.hpp"

namespace mmrl::harness {

enum class AgentKind { kDqn, kPpo };

std::string to_string(AgentKind agent);

struct ExperimentConfig {
  AgentKind agent = AgentKind::kDqn;
  std::size_t training_episodes = 200;
  std::size_t eval_episodes = 20;
  std::optional<std::uint64_t> seed;
  /// Row label in comparison reports; "<agent>-<mode>" when empty.
  std::string label;
  /// Caption corpus scored alongside the run; optional.
  std::string caption_corpus;
  bool write_curve = false;
  /// Not part of the config hash.
  std::filesystem::path output;

  /// Existing dataset directory; when empty a synthetic one is generated
  /// from `synth` with synth_seed (default: seed).
  std::string dataset_path;
  dataset::SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;

  env::TrajectoryEnvConfig env;
  fusion::EncoderConfig encoder;
  std::size_t vocab_min_count = 1;
  agents::DqnConfig dqn;
  agents::PpoConfig ppo;

  std::string display_label() const;
  /// Throws ValidationError.
  void validate() const;
};

/// Parses INI text over the defaults. Unknown sections or keys, and values
/// that do not parse, are ValidationErrors.
ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "section.key=value".
void apply_override(ExperimentConfig& config, const std::string& assignment);
void set_value(ExperimentConfig& config, const std::string& section, const std::string& key,
               const std::string& value);

/// Canonical INI text of every key in fixed order.
std::string to_ini(const ExperimentConfig& config, bool include_output = true);

/// SHA-256 of the canonical text without the output path.
std::string config_hash(const ExperimentConfig& config);

}  // namespace mmrl::harness
