// SPDX-License-Identifier: Apache-2.0
//
// mmrl: dataset synthesis, training runs, ablations and reports.
// Exit status: 0 success, 1 invalid input, 2 runtime failure.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/dataset/synthetic.hpp"
#include "mmrl/harness/config.hpp"
#include "mmrl/harness/experiment.hpp"
#include "mmrl/harness/reports.hpp"

namespace {

using namespace mmrl;

struct RunOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string agent;
  std::string mode;
  std::optional<std::size_t> training_episodes;
  std::optional<std::size_t> eval_episodes;
  std::string dataset;
  bool curve = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_mode) {
  cmd->add_option("-c,--config", o.config_file, "INI config file");
  cmd->add_option("--set", o.overrides, "override, section.key=value (repeatable)");
  cmd->add_option("-o,--out", o.output, "output directory")->required();
  cmd->add_option("--seed", o.seed, "experiment seed");
  cmd->add_option("--agent", o.agent, "dqn or ppo");
  if (with_mode) cmd->add_option("--mode", o.mode, "multimodal, visual_only or text_only");
  cmd->add_option("--episodes", o.training_episodes, "training episodes");
  cmd->add_option("--eval-episodes", o.eval_episodes, "evaluation episodes");
  cmd->add_option("--dataset", o.dataset, "dataset directory (default: synthesize)");
  cmd->add_flag("--curve", o.curve, "also write curve.svg");
}

harness::ExperimentConfig build_config(const RunOptions& o) {
  auto cfg = o.config_file.empty() ? harness::ExperimentConfig{} : harness::load_config(o.config_file);
  for (const auto& s : o.overrides) harness::apply_override(cfg, s);
  if (o.seed) cfg.seed = o.seed;
  if (!o.agent.empty()) harness::set_value(cfg, "experiment", "agent", o.agent);
  if (!o.mode.empty()) harness::set_value(cfg, "experiment", "mode", o.mode);
  if (o.training_episodes) cfg.training_episodes = *o.training_episodes;
  if (o.eval_episodes) cfg.eval_episodes = *o.eval_episodes;
  if (!o.dataset.empty()) cfg.dataset_path = o.dataset;
  if (o.curve) cfg.write_curve = true;
  cfg.output = o.output;
  return cfg;
}

void print_run(const harness::RunResult& r) {
  std::printf("%s  seed %llu  completion %.1f%%  cum_reward %.2f  accuracy %.4f  config %s\n", r.label.c_str(),
              static_cast<unsigned long long>(r.seed), 100.0 * r.summary.completion_rate, r.summary.mean_cum_reward,
              r.summary.mean_accuracy, r.config_hash.substr(0, 12).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal RL experiments over captioned trajectories"};
  app.require_subcommand(1);

  // gen-synth
  dataset::SynthConfig synth;
  std::string synth_out, synth_mode = "features";
  std::uint64_t synth_seed = 42;
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic aliased dataset");
  gen->add_option("-o,--out", synth_out, "dataset directory")->required();
  gen->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  gen->add_option("--name", synth.name)->capture_default_str();
  gen->add_option("--episodes", synth.episode_count)->capture_default_str();
  gen->add_option("--steps", synth.steps_per_episode)->capture_default_str();
  gen->add_option("-k,--actions", synth.action_count)->capture_default_str();
  gen->add_option("--feature-dim", synth.feature_dim)->capture_default_str();
  gen->add_option("-q,--alias-fraction", synth.alias_fraction)->capture_default_str();
  gen->add_option("--noise", synth.noise)->capture_default_str();
  gen->add_option("--mode", synth_mode, "features or images")->capture_default_str();
  gen->add_option("--image-size", synth.image_size)->capture_default_str();

  RunOptions train_opts;
  auto* train = app.add_subcommand("train", "train and evaluate one agent");
  add_run_options(train, train_opts, true);

  RunOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "multimodal / visual_only / text_only runs");
  add_run_options(ablate, ablate_opts, false);

  std::string before, after, captions_csv;
  bool percent = false, smoothing = false;
  auto* eval = app.add_subcommand("eval-captions", "caption metrics before and after");
  eval->add_option("before", before, "caption corpus (JSONL)")->required();
  eval->add_option("after", after, "caption corpus (JSONL)")->required();
  eval->add_flag("--percent", percent, "scale scores by 100");
  eval->add_flag("--smooth-bleu", smoothing, "add-one style smoothing for zero n-gram counts");
  eval->add_option("--csv", captions_csv, "also write metric,before,after CSV");

  std::vector<std::string> results;
  std::string external, compare_csv;
  auto* compare = app.add_subcommand("compare", "framework comparison table");
  compare->add_option("results", results, "summary.json files or run directories")->required();
  compare->add_option("--external", external, "CSV rows for other frameworks");
  compare->add_option("--csv", compare_csv, "also write the table as CSV");

  std::vector<std::string> curve_inputs;
  std::string curve_out;
  std::size_t window = 5;
  auto* curve = app.add_subcommand("curve", "reward-trend SVG from rewards.csv files");
  curve->add_option("inputs", curve_inputs, "rewards.csv files")->required();
  curve->add_option("-o,--out", curve_out, "SVG path")->required();
  curve->add_option("--window", window, "moving-average window")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      if (synth_mode == "images") {
        synth.mode = dataset::DatasetMode::kImages;
      } else if (synth_mode != "features") {
        throw ValidationError("--mode must be features or images");
      }
      const auto ds = dataset::generate_synthetic(synth, synth_seed);
      dataset::write_synthetic(ds, synth_out);
      const auto& m = ds.data.manifest;
      std::printf("%s: %zu episodes x %zu steps, k=%d, %s, feature_dim %zu, seed %llu\n", m.name.c_str(),
                  m.episode_count, synth.steps_per_episode, m.action_count, dataset::to_string(m.mode).c_str(),
                  m.feature_dim, static_cast<unsigned long long>(synth_seed));
      std::printf("tree %s\n", tree_hash(synth_out).c_str());
    } else if (*train) {
      print_run(harness::run_experiment(build_config(train_opts)));
    } else if (*ablate) {
      const auto runs = harness::run_ablation(build_config(ablate_opts));
      std::cout << harness::ablation_table(runs);
    } else if (*eval) {
      textmetrics::EvalOptions options;
      options.percent_scale = percent;
      options.bleu.smoothing = smoothing;
      const auto cmp = harness::compare_caption_files(before, after, options);
      std::cout << harness::render_caption_comparison(cmp, options);
      if (!captions_csv.empty()) write_file(captions_csv, harness::caption_comparison_csv(cmp, options));
    } else if (*compare) {
      std::vector<harness::FrameworkRow> rows;
      for (const auto& r : results) rows.push_back(harness::framework_row(harness::read_summary(r)));
      if (!external.empty()) {
        for (auto& row : harness::read_external_rows(external)) rows.push_back(std::move(row));
      }
      rows = harness::sort_rows(std::move(rows));
      std::cout << harness::render_comparison(rows);
      if (!compare_csv.empty()) write_file(compare_csv, harness::comparison_csv(rows));
    } else if (*curve) {
      std::vector<harness::CurveSeries> series;
      for (const auto& in : curve_inputs) series.push_back(harness::read_reward_series(in));
      write_file(curve_out, harness::render_curve_svg(series, window));
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const RuntimeFailure& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
