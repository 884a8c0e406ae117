// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "mmrl/common/errors.hpp"
#include "mmrl/dataset/synthetic.hpp"
#include "mmrl/env/trajectory_env.hpp"

using namespace mmrl;
using namespace mmrl::env;

namespace {

std::shared_ptr<const dataset::Dataset> small_data(std::uint64_t seed, std::size_t episodes = 5, std::size_t steps = 4) {
  dataset::SynthConfig cfg;
  cfg.episode_count = episodes;
  cfg.steps_per_episode = steps;
  cfg.feature_dim = 6;
  return std::make_shared<const dataset::Dataset>(dataset::generate_synthetic(cfg, seed).data);
}

int truth(const TrajectoryEnv& env, const Observation& obs) {
  return env.data().episodes[obs.episode_id].steps[obs.step_index].action;
}

std::vector<StepOutcome> play_episode(TrajectoryEnv& env, const std::function<int(const Observation&)>& policy) {
  std::vector<StepOutcome> outcomes;
  Observation obs = env.reset();
  while (true) {
    auto result = env.step(policy(obs));
    outcomes.push_back(result.outcome);
    if (result.outcome.done) break;
    obs = *result.observation;
  }
  return outcomes;
}

}  // namespace

TEST_CASE("reset walks episodes in order and wraps") {
  TrajectoryEnv env(small_data(1, 3), {});
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t e = 0; e < 3; ++e) {
      const auto obs = env.reset();
      CHECK(obs.episode_id == e);
      CHECK(obs.step_index == 0);
    }
  }
}

TEST_CASE("step rewards, termination and errors") {
  TrajectoryEnv env(small_data(2), {});
  CHECK_THROWS_AS(env.step(0), RuntimeFailure);
  auto obs = env.reset();
  const int right = truth(env, obs);
  auto r = env.step(right);
  CHECK(r.outcome.reward == 1.0);
  CHECK(r.outcome.correct);
  CHECK_FALSE(r.outcome.done);
  REQUIRE(r.observation.has_value());
  CHECK(r.observation->step_index == 1);

  const int wrong = (truth(env, *r.observation) + 1) % env.action_count();
  r = env.step(wrong);
  CHECK(r.outcome.reward == 0.0);
  CHECK_FALSE(r.outcome.correct);

  CHECK_THROWS_AS(env.step(-1), ValidationError);
  CHECK_THROWS_AS(env.step(env.action_count()), ValidationError);

  r = env.step(0);
  r = env.step(0);  // index T-1
  CHECK(r.outcome.done);
  CHECK_FALSE(r.observation.has_value());
  CHECK_THROWS_AS(env.step(0), RuntimeFailure);
}

TEST_CASE("episode_stats examples") {
  std::vector<StepOutcome> all(20, {1.0, false, true});
  all.back().done = true;
  auto s = episode_stats(all, 0.8);
  CHECK(s.cumulative_reward == 20.0);
  CHECK(s.accuracy == 1.0);
  CHECK(s.completed);

  std::vector<StepOutcome> fifteen(20, {0.0, false, false});
  for (std::size_t i = 0; i < 15; ++i) fifteen[i] = {1.0, false, true};
  s = episode_stats(fifteen, 0.8);
  CHECK(s.accuracy == 0.75);
  CHECK_FALSE(s.completed);

  fifteen[15] = {1.0, false, true};
  CHECK(episode_stats(fifteen, 0.8).completed);
  CHECK_THROWS_AS(episode_stats(std::vector<StepOutcome>{}, 0.8), ValidationError);
}

TEST_CASE("shuffled order is a deterministic permutation per pass") {
  const auto data = small_data(3, 8);
  TrajectoryEnvConfig cfg;
  cfg.order = EpisodeOrder::kShuffled;
  cfg.shuffle_seed = 17;
  TrajectoryEnv a(data, cfg), b(data, cfg);
  std::vector<std::size_t> first_pass;
  for (int i = 0; i < 16; ++i) {
    const auto ea = a.reset().episode_id;
    CHECK(ea == b.reset().episode_id);
    if (i < 8) first_pass.push_back(ea);
  }
  std::sort(first_pass.begin(), first_pass.end());
  for (std::size_t i = 0; i < 8; ++i) CHECK(first_pass[i] == i);
}

TEST_CASE("episode selection restricts the env") {
  TrajectoryEnv env(small_data(4, 6), {}, {4, 5});
  CHECK(env.episode_count() == 2);
  CHECK(env.reset().episode_id == 4);
  CHECK(env.reset().episode_id == 5);
  CHECK(env.reset().episode_id == 4);
  CHECK_THROWS_AS(TrajectoryEnv(small_data(4, 6), {}, {6}), ValidationError);
  TrajectoryEnvConfig bad;
  bad.completion_threshold = 0;
  CHECK_THROWS_AS(TrajectoryEnv(small_data(4, 6), bad), ValidationError);
}

TEST_CASE("oracle policies on the aliased environment") {
  // q = 0: the nearest-prototype rule on visuals is perfect. We recover the
  // prototypes from a q=0 dataset by averaging visuals per action.
  auto env0 = make_aliased_env(4, 0.0, 10, 20, 5, 16);
  std::vector<std::vector<double>> means(4, std::vector<double>(16, 0.0));
  std::vector<double> counts(4, 0);
  for (const auto& ep : env0.data().episodes) {
    for (const auto& st : ep.steps) {
      const auto& v = std::get<std::vector<double>>(st.visual);
      for (std::size_t i = 0; i < 16; ++i) means[static_cast<std::size_t>(st.action)][i] += v[i];
      ++counts[static_cast<std::size_t>(st.action)];
    }
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (auto& m : means[a]) m /= counts[a];
  }
  const auto nearest = [&](const Observation& o) {
    int best = 0;
    double best_d = INFINITY;
    for (std::size_t a = 0; a < 4; ++a) {
      double d = 0;
      for (std::size_t i = 0; i < 16; ++i) d += (o.visual[i] - means[a][i]) * (o.visual[i] - means[a][i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(a);
      }
    }
    return best;
  };
  for (int e = 0; e < 20; ++e) CHECK(episode_stats(play_episode(env0, nearest), 0.8).accuracy == 1.0);

  const auto caption_policy = [](const Observation& o) { return *dataset::action_from_caption(o.caption); };
  for (const double q : {0.0, 0.5, 1.0}) {
    auto env = make_aliased_env(4, q, 10, 10, 6, 16);
    for (int e = 0; e < 10; ++e) {
      const auto s = episode_stats(play_episode(env, caption_policy), 0.8);
      CHECK(s.accuracy == 1.0);
      CHECK(s.completed);
    }
  }
  CHECK_THROWS_AS(make_aliased_env(4, 1.5, 10, 10, 6, 16), ValidationError);
}

TEST_CASE("env invariants under random play") {
  const auto data = small_data(7, 6, 9);
  Rng rng(8);
  TrajectoryEnv env(data, {});
  std::vector<int> actions;
  std::vector<StepOutcome> record;
  for (int e = 0; e < 12; ++e) {
    const auto outcomes = play_episode(env, [&](const Observation&) {
      actions.push_back(static_cast<int>(rng.uniform_index(4)));
      return actions.back();
    });
    CHECK(outcomes.size() == 9);
    const auto s = episode_stats(outcomes, 0.8);
    CHECK(s.cumulative_reward >= 0.0);
    CHECK(s.cumulative_reward <= 9.0);
    CHECK(s.cumulative_reward == doctest::Approx(s.accuracy * 9).epsilon(1e-15));
    record.insert(record.end(), outcomes.begin(), outcomes.end());
  }
  // Replaying the same actions gives the same outcomes.
  TrajectoryEnv replay(data, {});
  std::size_t next = 0, k = 0;
  for (int e = 0; e < 12; ++e) {
    for (const auto& o : play_episode(replay, [&](const Observation&) { return actions[next++]; })) {
      CHECK(o.reward == record[k].reward);
      CHECK(o.correct == record[k].correct);
      CHECK(o.done == record[k].done);
      ++k;
    }
  }
}
