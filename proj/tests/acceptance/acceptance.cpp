// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS/FAIL line per primary criterion. The report is
// also written to <work-dir>/acceptance.txt. Exit status is 0 once every
// criterion has been evaluated; with --strict any FAIL makes it 1.
#include <CLI11.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "mmrl/common/io.hpp"
#include "mmrl/dataset/synthetic.hpp"
#include "mmrl/env/trajectory_env.hpp"
#include "mmrl/harness/experiment.hpp"
#include "mmrl/textmetrics/metrics.hpp"
#include "support/gradient_suite.hpp"
#include "support/metric_oracle.hpp"

namespace fs = std::filesystem;
using namespace mmrl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  void add(const std::string& id, const Outcome& o) {
    line(id + " " + (o.pass ? "PASS" : "FAIL") + "  " + o.detail);
    failed_ += !o.pass;
  }
  void line(const std::string& text) {
    std::cout << text << std::endl;
    text_ += text + "\n";
  }
  int failed() const { return failed_; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  int failed_ = 0;
};

// --- 1: finite-difference checks over 20 seeds -----------------------------

Outcome gradients() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_case = "-";
  std::size_t runs = 0;
  bool all = true;
  for (const auto& gc : testing::gradient_cases(1e-4)) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = gc.run(seed);
      ++runs;
      all = all && r.passed && r.checked > 0;
      if (r.max_relative_error > worst) {
        worst = r.max_relative_error;
        worst_case = gc.name + "/seed " + std::to_string(seed);
      }
    }
  }
  const double secs = seconds_since(start);
  return {all && secs < 30.0, std::to_string(runs) + " checks, max rel err " + fmt(worst, 3) + " (" + worst_case +
                                  "), " + fmt(secs, 3) + " s"};
}

// --- 2: metrics vs brute-force oracle --------------------------------------

Outcome metrics() {
  using namespace textmetrics;
  const auto start = Clock::now();
  const auto corpus = testing::random_corpus(2024, 50, 20, 1, 15);
  std::vector<CaptionPair> pairs;
  for (const auto& p : corpus) pairs.push_back({p.candidate, p.references});

  double worst = 0.0;
  const auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (const int n : {1, 2, 3, 4}) {
    track(bleu_corpus(pairs, {n, false}), testing::oracle_bleu(corpus, n, false));
    track(bleu_corpus(pairs, {n, true}), testing::oracle_bleu(corpus, n, true));
  }
  for (const auto& p : corpus) {
    const std::vector<TokenSequence> refs(p.references.begin(), p.references.end());
    track(rouge_n(p.candidate, refs, 1), testing::oracle_rouge_n(p.candidate, p.references, 1));
    track(rouge_n(p.candidate, refs, 2), testing::oracle_rouge_n(p.candidate, p.references, 2));
    track(rouge_l(p.candidate, refs), testing::oracle_rouge_l(p.candidate, p.references));
    track(meteor(p.candidate, refs), testing::oracle_meteor(p.candidate, p.references));
  }

  using Refs = std::vector<TokenSequence>;
  const std::vector<CaptionPair> short_cand = {{{"the", "robot"}, {{"the", "robot", "moves"}}}};
  bool hand = std::abs(bleu_corpus(short_cand, {2, false}) - std::exp(-0.5)) < 1e-15;
  hand = hand && meteor({"red", "block"}, Refs{{"red", "block"}}) == 0.9375;
  hand = hand && std::abs(meteor({"the", "robot", "moves"}, Refs{{"the", "robot", "turns"}}) - 0.625) < 1e-15;
  hand = hand && std::abs(rouge_n({"robot", "picks", "block"}, Refs{{"robot", "picks", "the", "red", "block"}}, 1) -
                          0.75) < 1e-15;
  hand = hand && std::abs(rouge_l({"a", "b", "c"}, Refs{{"a", "c", "b"}}) - 2.0 / 3) < 1e-15;

  const double secs = seconds_since(start);
  return {worst < 1e-9 && hand && secs < 5.0, "max |lib - oracle| " + fmt(worst, 3) + ", hand examples " +
                                                  (hand ? "exact" : "MISMATCH") + ", " + fmt(secs, 3) + " s"};
}

// --- 3, 4, 5: training runs on the aliased environment ---------------------

harness::ExperimentConfig aliased_config(harness::AgentKind agent, std::uint64_t seed) {
  harness::ExperimentConfig cfg;
  cfg.agent = agent;
  cfg.seed = seed;
  cfg.training_episodes = 200;
  cfg.eval_episodes = 20;
  cfg.synth.action_count = 4;
  cfg.synth.alias_fraction = 0.5;
  cfg.synth.steps_per_episode = 20;
  cfg.env.completion_threshold = 0.8;
  return cfg;
}

struct AblationSeed {
  std::uint64_t seed;
  std::vector<harness::RunResult> runs;  // multimodal, visual_only, text_only
  double seconds;
};

Outcome directional(const std::vector<AblationSeed>& seeds) {
  bool pass = true;
  std::string detail;
  for (const auto& s : seeds) {
    const double multi = s.runs[0].summary.completion_rate;
    const double visual = s.runs[1].summary.completion_rate;
    const bool ok = multi >= 0.85 && visual <= 0.70 && multi - visual >= 0.15 && s.seconds < 300.0;
    pass = pass && ok;
    detail += "seed " + std::to_string(s.seed) + ": multimodal " + fmt(multi) + " visual_only " + fmt(visual) + " (" +
              fmt(s.seconds, 3) + " s); ";
  }
  return {pass, detail};
}

Outcome ablation(const std::vector<AblationSeed>& seeds) {
  bool pass = true;
  std::string detail;
  for (const auto& s : seeds) {
    bool ok = s.runs.size() == 3 && s.runs[0].mode == "multimodal" && s.runs[1].mode == "visual_only" &&
              s.runs[2].mode == "text_only";
    if (ok) {
      const double multi = s.runs[0].summary.completion_rate;
      ok = multi > s.runs[1].summary.completion_rate && multi > s.runs[2].summary.completion_rate;
    }
    pass = pass && ok;
    detail += "seed " + std::to_string(s.seed) + ": " + std::to_string(s.runs.size()) + " rows";
    for (const auto& r : s.runs) detail += " " + r.mode + "=" + fmt(r.summary.completion_rate);
    detail += "; ";
  }
  return {pass, detail};
}

Outcome ppo_learning(const fs::path& work) {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto cfg = aliased_config(harness::AgentKind::kPpo, seed);
    cfg.output = work / ("ppo_seed" + std::to_string(seed));
    const auto start = Clock::now();
    const auto run = harness::run_experiment(cfg);
    const double secs = seconds_since(start);
    const double first = run.summary.train_first_decile_reward;
    const double last = run.summary.train_last_decile_reward;
    const bool ok = first > 0 && last >= 1.5 * first && secs < 300.0;
    pass = pass && ok;
    detail += "seed " + std::to_string(seed) + ": " + fmt(first) + " -> " + fmt(last) + " (x" +
              fmt(first > 0 ? last / first : 0.0, 3) + ", " + fmt(secs, 3) + " s); ";
  }
  return {pass, detail};
}

// --- 6: two CLI executions, byte-identical artifacts -----------------------

Outcome determinism(const fs::path& work) {
  const std::string common = " train --seed 11 --episodes 40 --eval-episodes 10";
  std::vector<fs::path> dirs = {work / "determinism_a", work / "determinism_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    const std::string cmd = std::string("'") + MMRL_CLI_PATH + "'" + common + " -o '" + d.string() + "' > '" +
                            (work / "determinism.log").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "train exited abnormally"};
  }
  bool pass = true;
  std::string detail;
  for (const char* name : {"rewards.csv", "summary.json", "checkpoint.txt"}) {
    const bool same = read_file(dirs[0] / name) == read_file(dirs[1] / name);
    pass = pass && same;
    detail += std::string(name) + (same ? " identical; " : " DIFFERS; ");
  }
  return {pass, detail};
}

// --- 7: analytic ceilings of oracle policies --------------------------------

Outcome ceilings() {
  dataset::SynthConfig synth;
  synth.name = "aliased";
  synth.episode_count = 500;  // 500 x 20 = 10 000 steps
  synth.steps_per_episode = 20;
  synth.action_count = 4;
  synth.alias_fraction = 0.5;
  auto generated = dataset::generate_synthetic(synth, 2024);
  auto centers = generated.prototypes.classes;
  centers.push_back(generated.prototypes.aliased);
  const auto data = std::make_shared<const dataset::Dataset>(std::move(generated.data));

  // Known prototypes; the aliased one is answered with a fixed action.
  const auto visual_oracle = [&](const env::Observation& o) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double d = 0;
      for (std::size_t i = 0; i < o.visual.size(); ++i) d += (o.visual[i] - centers[c][i]) * (o.visual[i] - centers[c][i]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best == centers.size() - 1 ? 0 : static_cast<int>(best);
  };
  const auto caption_oracle = [](const env::Observation& o) {
    const auto a = dataset::action_from_caption(o.caption);
    return a ? *a : 0;
  };

  const auto play = [&](const std::function<int(const env::Observation&)>& policy) {
    env::TrajectoryEnv env(data, {});
    std::size_t correct = 0, steps = 0;
    for (std::size_t e = 0; e < env.episode_count(); ++e) {
      auto obs = env.reset();
      while (true) {
        const auto r = env.step(policy(obs));
        correct += r.outcome.correct;
        ++steps;
        if (r.outcome.done) break;
        obs = *r.observation;
      }
    }
    return std::pair{correct, steps};
  };
  const auto [vc, vn] = play(visual_oracle);
  const auto [cc, cn] = play(caption_oracle);
  const double visual_acc = static_cast<double>(vc) / static_cast<double>(vn);
  const double caption_acc = static_cast<double>(cc) / static_cast<double>(cn);
  return {std::abs(visual_acc - 0.625) <= 0.03 && cc == cn,
          "visual oracle " + fmt(visual_acc) + " over " + std::to_string(vn) + " steps (target 0.625 +- 0.03), caption "
              "oracle " + fmt(caption_acc) + " over " + std::to_string(cn) + " steps"};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance runner"};
  fs::path work = fs::temp_directory_path() / "mmrl-acceptance";
  bool strict = false;
  app.add_option("--work-dir", work, "scratch directory for run outputs");
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  Report report;
  report.add("1", guarded(gradients));
  report.add("2", guarded(metrics));

  std::vector<AblationSeed> seeds;
  const auto collect = [&]() -> Outcome {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto cfg = aliased_config(harness::AgentKind::kDqn, seed);
      cfg.output = work / ("ablation_seed" + std::to_string(seed));
      const auto start = Clock::now();
      auto runs = harness::run_ablation(cfg);
      seeds.push_back({seed, std::move(runs), seconds_since(start)});
    }
    return {true, ""};
  };
  const Outcome collected = guarded(collect);
  if (collected.pass) {
    report.add("3", directional(seeds));
  } else {
    report.add("3", collected);
  }
  report.add("4", guarded([&] { return ppo_learning(work); }));
  report.add("5", collected.pass ? ablation(seeds) : collected);
  report.add("6", guarded([&] { return determinism(work); }));
  report.add("7", guarded(ceilings));
  report.line("8 SKIP  secondary component (captioner adapter) not built");

  write_file(work / "acceptance.txt", report.text());
  std::cout << report.failed() << " of 7 primary criteria failed" << std::endl;
  return strict && report.failed() > 0 ? 1 : 0;
}
