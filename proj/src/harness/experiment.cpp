// SPDX-License-Identifier: Apache-2.0
#include "mmrl/harness/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <memory>
#include <numeric>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/dataset/dataset.hpp"
#include "mmrl/dataset/synthetic.hpp"
#include "mmrl/harness/reports.hpp"

namespace mmrl::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

struct LoadedData {
  std::shared_ptr<const dataset::Dataset> data;
  std::filesystem::path image_root;
};

LoadedData load_data(const ExperimentConfig& config) {
  if (!config.dataset_path.empty()) {
    const auto report = dataset::validate_schema(config.dataset_path);
    if (!report.ok()) throw ValidationError("dataset failed validation:\n" + report.describe());
    return {std::make_shared<const dataset::Dataset>(dataset::load_dataset(config.dataset_path)),
            config.dataset_path};
  }
  auto synth = dataset::generate_synthetic(config.synth, config.synth_seed.value_or(*config.seed));
  std::filesystem::path root;
  if (config.synth.mode == dataset::DatasetMode::kImages) {
    // The environment reads images from disk.
    if (config.output.empty()) throw ValidationError("synthetic images mode needs an output directory");
    root = config.output / "dataset";
    dataset::write_synthetic(synth, root);
  }
  return {std::make_shared<const dataset::Dataset>(std::move(synth.data)), root};
}

double mean_of(const std::vector<agents::EpisodeResult>& rows, std::size_t begin, std::size_t end) {
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += rows[i].cumulative_reward;
  return end > begin ? total / static_cast<double>(end - begin) : 0.0;
}

std::string train_log_csv(const agents::TrainingRun& run, AgentKind agent) {
  std::string out = agent == AgentKind::kDqn ? "step,loss,epsilon\n" : "step,loss,entropy\n";
  for (const auto& row : run.log) {
    out += std::to_string(row.step) + "," + format_real(row.loss) + "," + format_real(row.aux) + "\n";
  }
  return out;
}

template <typename Network>
void write_checkpoint(const Network& net, const ExperimentConfig& config, const std::string& hash) {
  nn::save_checkpoint(net.params(), config.output / "checkpoint.txt",
                      {"config_hash " + hash, "seed " + std::to_string(*config.seed), "agent " + to_string(config.agent),
                       "mode " + fusion::to_string(config.encoder.mode)});
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config_hash(config);
  const auto loaded = load_data(config);
  const auto& data = *loaded.data;

  const std::size_t total = data.episodes.size();
  if (total <= config.eval_episodes && config.training_episodes > 0) {
    throw ValidationError("dataset has " + std::to_string(total) + " episodes; need more than eval_episodes (" +
                          std::to_string(config.eval_episodes) + ") to leave a training split");
  }
  // The last eval_episodes episodes are held out (all of them when there are fewer).
  const std::size_t eval_count = std::min(total, config.eval_episodes);
  std::vector<std::size_t> train_ids(total - eval_count), eval_ids(eval_count);
  std::iota(train_ids.begin(), train_ids.end(), std::size_t{0});
  std::iota(eval_ids.begin(), eval_ids.end(), total - eval_count);

  std::vector<std::string> train_captions;
  for (const auto e : (train_ids.empty() ? eval_ids : train_ids)) {
    for (const auto& step : data.episodes[e].steps) train_captions.push_back(step.caption);
  }
  const auto vocab = fusion::Vocabulary::build(train_captions, config.vocab_min_count);

  Rng rng(*config.seed);
  env::TrajectoryEnvConfig train_env_cfg = config.env;
  train_env_cfg.shuffle_seed = rng.next_u64();
  env::TrajectoryEnvConfig eval_env_cfg = config.env;
  eval_env_cfg.order = env::EpisodeOrder::kSequential;
  env::TrajectoryEnv eval_env(loaded.data, eval_env_cfg, eval_ids, loaded.image_root);
  std::optional<env::TrajectoryEnv> train_env;
  if (config.training_episodes > 0) train_env.emplace(loaded.data, train_env_cfg, train_ids, loaded.image_root);

  const auto visual = data.manifest.mode == dataset::DatasetMode::kImages
                          ? fusion::VisualSpec::image(eval_env.image_height(), eval_env.image_width())
                          : fusion::VisualSpec::features(data.manifest.feature_dim);
  const agents::ObservationEncoder encode(vocab, config.encoder.max_caption_len);
  const agents::RunBudget budget{config.training_episodes, eval_count};
  const int k = data.manifest.action_count;

  agents::TrainingRun run;
  std::optional<agents::QNetwork> qnet;
  std::optional<agents::PolicyValueNetwork> pvnet;
  if (config.agent == AgentKind::kDqn) {
    qnet.emplace(config.encoder, visual, vocab.size(), k, config.dqn.hidden, rng);
    if (train_env) {
      run = agents::run_dqn(*qnet, *train_env, eval_env, encode, config.dqn, budget, rng);
    } else {
      run.eval = agents::evaluate_dqn(*qnet, eval_env, encode, eval_count);
    }
  } else {
    pvnet.emplace(config.encoder, visual, vocab.size(), k, config.ppo.hidden, rng);
    if (train_env) {
      run = agents::run_ppo(*pvnet, *train_env, eval_env, encode, config.ppo, budget, rng);
    } else {
      run.eval = agents::evaluate_ppo(*pvnet, eval_env, encode, eval_count);
    }
  }

  RunResult result;
  result.label = config.display_label();
  result.agent = to_string(config.agent);
  result.mode = fusion::to_string(config.encoder.mode);
  result.seed = *config.seed;
  result.config_hash = hash;
  result.training_episodes = run.train.size();
  result.eval_episodes = run.eval.size();
  for (const auto* part : {&run.train, &run.eval}) {
    for (const auto& e : *part) {
      result.episodes.push_back({result.episodes.size(), e.cumulative_reward, e.accuracy, e.completed});
    }
  }
  auto& s = result.summary;
  for (const auto& e : run.eval) {
    s.completion_rate += e.completed ? 1.0 : 0.0;
    s.mean_cum_reward += e.cumulative_reward;
    s.mean_accuracy += e.accuracy;
  }
  const double n_eval = static_cast<double>(run.eval.size());
  s.completion_rate /= n_eval;
  s.mean_cum_reward /= n_eval;
  s.mean_accuracy /= n_eval;
  const std::size_t n_train = run.train.size();
  if (n_train > 0) {
    const std::size_t decile = std::max<std::size_t>(1, n_train / 10);
    s.train_first_decile_reward = mean_of(run.train, 0, decile);
    s.train_last_decile_reward = mean_of(run.train, n_train - decile, n_train);
  }
  if (!config.caption_corpus.empty()) result.captions = textmetrics::evaluate_caption_file(config.caption_corpus);

  if (!config.output.empty()) {
    const auto& out = config.output;
    write_file(out / "config.ini", to_ini(config, false));
    write_file(out / "rewards.csv", rewards_csv(result));
    write_file(out / "summary.json", summary_json(result));
    write_file(out / "train_log.csv", train_log_csv(run, config.agent));
    vocab.save(out / "vocab.tsv");
    if (qnet) write_checkpoint(*qnet, config, hash);
    if (pvnet) write_checkpoint(*pvnet, config, hash);
    if (config.write_curve) {
      CurveSeries series{result.label, {}};
      for (const auto& row : result.episodes) series.rewards.push_back(row.cum_reward);
      write_file(out / "curve.svg", render_curve_svg({series}, 5));
    }
  }
  return result;
}

std::string rewards_csv(const RunResult& result) {
  std::string out = "episode,cum_reward,accuracy,completed\n";
  for (const auto& row : result.episodes) {
    out += std::to_string(row.episode) + "," + format_real(row.cum_reward) + "," + format_real(row.accuracy) + "," +
           (row.completed ? "1" : "0") + "\n";
  }
  return out;
}

std::string summary_json(const RunResult& result) {
  ordered_json j;
  j["label"] = result.label;
  j["agent"] = result.agent;
  j["mode"] = result.mode;
  j["seed"] = result.seed;
  j["config_hash"] = result.config_hash;
  j["training_episodes"] = result.training_episodes;
  j["eval_episodes"] = result.eval_episodes;
  j["completion_rate"] = result.summary.completion_rate;
  j["mean_cum_reward"] = result.summary.mean_cum_reward;
  j["mean_accuracy"] = result.summary.mean_accuracy;
  j["train_first_decile_reward"] = result.summary.train_first_decile_reward;
  j["train_last_decile_reward"] = result.summary.train_last_decile_reward;
  if (result.captions) {
    j["captions"] = {{"bleu", result.captions->bleu},
                     {"rouge1", result.captions->rouge1},
                     {"rouge2", result.captions->rouge2},
                     {"rougeL", result.captions->rougeL},
                     {"meteor", result.captions->meteor},
                     {"pairs", result.captions->pair_count}};
  } else {
    j["captions"] = nullptr;
  }
  return j.dump(2) + "\n";
}

RunResult read_summary(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "summary.json" : path;
  if (!std::filesystem::is_regular_file(file)) throw ValidationError("result file not found: " + file.string());
  RunResult r;
  try {
    const auto j = nlohmann::json::parse(read_file(file));
    r.label = j.at("label").get<std::string>();
    r.agent = j.at("agent").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.training_episodes = j.at("training_episodes").get<std::size_t>();
    r.eval_episodes = j.at("eval_episodes").get<std::size_t>();
    r.summary.completion_rate = j.at("completion_rate").get<double>();
    r.summary.mean_cum_reward = j.at("mean_cum_reward").get<double>();
    r.summary.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.summary.train_first_decile_reward = j.at("train_first_decile_reward").get<double>();
    r.summary.train_last_decile_reward = j.at("train_last_decile_reward").get<double>();
    const auto& c = j.at("captions");
    if (!c.is_null()) {
      textmetrics::MetricReport m;
      m.bleu = c.at("bleu").get<double>();
      m.rouge1 = c.at("rouge1").get<double>();
      m.rouge2 = c.at("rouge2").get<double>();
      m.rougeL = c.at("rougeL").get<double>();
      m.meteor = c.at("meteor").get<double>();
      m.pair_count = c.at("pairs").get<std::size_t>();
      r.captions = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed result file " + file.string() + ": " + e.what());
  }
  return r;
}

std::vector<RunResult> run_ablation(const ExperimentConfig& base) {
  base.validate();
  std::vector<RunResult> runs;
  for (const auto mode : {fusion::FusionMode::kMultimodal, fusion::FusionMode::kVisualOnly,
                          fusion::FusionMode::kTextOnly}) {
    ExperimentConfig cfg = base;
    cfg.encoder.mode = mode;
    cfg.label.clear();
    if (!base.output.empty()) cfg.output = base.output / fusion::to_string(mode);
    runs.push_back(run_experiment(cfg));
  }
  if (!base.output.empty()) {
    write_file(base.output / "ablation.csv", ablation_csv(runs));
    write_file(base.output / "ablation.txt", ablation_table(runs));
  }
  return runs;
}

std::string ablation_csv(const std::vector<RunResult>& runs) {
  std::string out = "mode,completion_rate,mean_cum_reward,seed,config_hash\n";
  for (const auto& r : runs) {
    out += r.mode + "," + format_real(r.summary.completion_rate) + "," + format_real(r.summary.mean_cum_reward) + "," +
           std::to_string(r.seed) + "," + r.config_hash + "\n";
  }
  return out;
}

std::string ablation_table(const std::vector<RunResult>& runs) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %15s %15s\n", "mode", "completion", "cum_reward");
  out += line;
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%-12s %14.1f%% %15.2f\n", r.mode.c_str(), 100.0 * r.summary.completion_rate,
                  r.summary.mean_cum_reward);
    out += line;
  }
  if (!runs.empty()) out += "seed " + std::to_string(runs.front().seed) + "\n";
  return out;
}

}  // namespace mmrl::harness
