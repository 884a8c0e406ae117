// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/agents/trainer.hpp"
#include "mmrl/harness/config.hpp"
#include "mmrl/textmetrics/report.hpp"

namespace mmrl::harness {

struct EpisodeRow {
  std::size_t episode = 0;
  double cum_reward = 0.0;
  double accuracy = 0.0;
  bool completed = false;
};

struct RunSummary {
  /// Completed eval episodes / eval episodes.
  double completion_rate = 0.0;
  /// Means over eval episodes.
  double mean_cum_reward = 0.0;
  double mean_accuracy = 0.0;
  /// Mean training reward over the first and last 10% of training episodes
  /// (at least one episode each; 0 without training).
  double train_first_decile_reward = 0.0;
  double train_last_decile_reward = 0.0;
};

struct RunResult {
  std::string label;
  std::string agent;
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t training_episodes = 0;
  std::size_t eval_episodes = 0;
  /// Training episodes first, then evaluation episodes; indices contiguous from 0.
  std::vector<EpisodeRow> episodes;
  RunSummary summary;
  /// Present when the config links a caption corpus.
  std::optional<textmetrics::MetricReport> captions;
};

/// Trains and evaluates one configured run. When config.output is set,
/// writes config.ini, rewards.csv, summary.json, checkpoint.txt, vocab.tsv,
/// train_log.csv and (if enabled) curve.svg there.
RunResult run_experiment(const ExperimentConfig& config);

/// rewards.csv body: "episode,cum_reward,accuracy,completed".
std::string rewards_csv(const RunResult& result);
std::string summary_json(const RunResult& result);
/// Reads summary.json (or the summary.json of a run directory). Throws
/// ValidationError on malformed input.
RunResult read_summary(const std::filesystem::path& path);

/// Three runs with identical seed and budget in the fixed order multimodal,
/// visual_only, text_only. With an output directory, each run goes in a
/// subdirectory named after its mode, and ablation.csv / ablation.txt are
/// written alongside.
std::vector<RunResult> run_ablation(const ExperimentConfig& base);

/// Header "mode,completion_rate,mean_cum_reward,seed,config_hash".
std::string ablation_csv(const std::vector<RunResult>& runs);
std::string ablation_table(const std::vector<RunResult>& runs);

}  // namespace mmrl::harness
