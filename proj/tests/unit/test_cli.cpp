// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "mmrl/common/io.hpp"
#include "support/temp_dir.hpp"

using mmrl::testing::TempDir;

namespace {

// Pinned once from `mmrl gen-synth -o <dir>` with default arguments.
constexpr const char* kDefaultSynthTreeHash = "1ae6b80320ccfaaee8665f5000ec61a6990341fa275fa235cf78cde829fed1b9";

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const TempDir& scratch) {
  const auto log = scratch / "cli.log";
  const std::string cmd = std::string("'") + MMRL_CLI_PATH + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = std::filesystem::exists(log) ? mmrl::read_file(log) : "";
  return r;
}

}  // namespace

TEST_CASE("gen-synth with default arguments produces the pinned tree") {
  TempDir dir;
  const auto first = run_cli("gen-synth -o '" + (dir / "a").string() + "'", dir);
  REQUIRE(first.exit_code == 0);
  const auto hash = mmrl::tree_hash(dir / "a");
  CHECK(first.output.find("tree " + hash) != std::string::npos);
  CHECK(hash == kDefaultSynthTreeHash);

  REQUIRE(run_cli("gen-synth -o '" + (dir / "b").string() + "'", dir).exit_code == 0);
  CHECK(mmrl::tree_hash(dir / "b") == hash);
}

TEST_CASE("exit codes: validation errors are 1, runtime failures are 2") {
  TempDir dir;
  CHECK(run_cli("gen-synth -q 1.2 -o '" + (dir / "x").string() + "'", dir).exit_code == 1);
  CHECK(run_cli("gen-synth", dir).exit_code == 1);
  CHECK(run_cli("frobnicate", dir).exit_code == 1);
  CHECK(run_cli("train -o '" + (dir / "t").string() + "'", dir).exit_code == 1);  // no seed

  mmrl::write_file(dir / "blocker", "x");
  const auto blocked = run_cli("gen-synth -o '" + (dir / "blocker" / "ds").string() + "'", dir);
  CHECK(blocked.exit_code == 2);

  CHECK(run_cli("eval-captions '" + (dir / "none.jsonl").string() + "' '" + (dir / "none.jsonl").string() + "'", dir)
            .exit_code == 1);
}

TEST_CASE("train and compare through the CLI") {
  TempDir dir;
  const std::string out = (dir / "run").string();
  const std::string common = " --seed 2 --episodes 3 --eval-episodes 2 --set synth.episode_count=6"
                             " --set synth.steps_per_episode=4 --set dqn.warmup_steps=4 --set dqn.batch_size=4";
  REQUIRE(run_cli("train -o '" + out + "'" + common, dir).exit_code == 0);
  CHECK(std::filesystem::exists(dir / "run" / "rewards.csv"));
  const auto cmp = run_cli("compare '" + out + "'", dir);
  CHECK(cmp.exit_code == 0);
  CHECK(cmp.output.find("task completion rate") != std::string::npos);
}
