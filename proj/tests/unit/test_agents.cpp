// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mmrl/agents/dqn.hpp"
#include "mmrl/agents/networks.hpp"
#include "mmrl/agents/ppo.hpp"
#include "mmrl/common/errors.hpp"
#include "mmrl/nn/gradcheck.hpp"

using namespace mmrl;
using namespace mmrl::agents;
using fusion::EncodedObservation;
using nn::Tensor;

namespace {

constexpr std::size_t kFeat = 5;
constexpr std::size_t kVocab = 7;

fusion::EncoderConfig tiny_encoder() {
  fusion::EncoderConfig cfg;
  cfg.d_visual = 6;
  cfg.d_text = 6;
  cfg.embed_dim = 4;
  cfg.max_caption_len = 4;
  cfg.visual_hidden = 8;
  return cfg;
}

EncodedObservation random_state(Rng& rng) {
  EncodedObservation s;
  s.visual.resize(kFeat);
  for (auto& v : s.visual) v = rng.uniform(-1, 1);
  s.caption_ids = {static_cast<int>(1 + rng.uniform_index(kVocab - 1)), static_cast<int>(1 + rng.uniform_index(kVocab - 1)),
                   0, 0};
  return s;
}

QNetwork tiny_qnet(std::uint64_t seed, int k = 3) {
  Rng rng(seed);
  return QNetwork(tiny_encoder(), fusion::VisualSpec::features(kFeat), kVocab, k, 8, rng);
}

std::vector<double> q_values(const QNetwork& net, const EncodedObservation& s) {
  const EncodedObservation* ptr = &s;
  const Tensor q = net.forward(net.encoder().make_batch({&ptr, 1}), nullptr);
  return q.values();
}

ReplayBuffer filled_buffer(std::uint64_t seed, std::size_t n, bool terminal_every_other) {
  Rng rng(seed);
  ReplayBuffer buffer(100);
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.state = random_state(rng);
    t.action = static_cast<int>(rng.uniform_index(3));
    t.reward = rng.uniform(0, 1);
    t.done = terminal_every_other && i % 2 == 0;
    if (!t.done) t.next_state = random_state(rng);
    buffer.push(std::move(t));
  }
  return buffer;
}

DqnConfig small_dqn() {
  DqnConfig cfg;
  cfg.batch_size = 4;
  cfg.warmup_steps = 4;
  return cfg;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("epsilon schedule") {
  DqnConfig cfg;
  CHECK(epsilon_at(cfg, 0, 1000) == 1.0);
  CHECK(epsilon_at(cfg, 500, 1000) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(epsilon_at(cfg, 250, 1000) == doctest::Approx(0.525).epsilon(1e-15));
  CHECK(epsilon_at(cfg, 900, 1000) == 0.05);
  double prev = 2;
  for (long s = 0; s <= 1200; s += 7) {
    const double e = epsilon_at(cfg, s, 1000);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("dqn_act: greedy, uniform exploration, ties") {
  auto net = tiny_qnet(1);
  auto& params = net.params();
  params[params.find("q.head.weight")].value.fill(0.0);
  params[params.find("q.head.bias")].value = Tensor({3}, {0.1, 0.9, 0.3});
  Rng rng(2);
  const auto s = random_state(rng);
  CHECK(dqn_act(net, s, 0.0, rng) == 1);

  std::vector<double> counts(3, 0);
  constexpr int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(dqn_act(net, s, 1.0, rng))];
  const double p = 1.0 / 3, sigma = std::sqrt(draws * p * (1 - p));
  for (const double c : counts) CHECK(std::abs(c - draws * p) < 3 * sigma);

  params[params.find("q.head.bias")].value = Tensor({3}, {0.5, 0.5, 0.2});
  CHECK(dqn_act(net, s, 0.0, rng) == 0);
  CHECK(greedy_action(std::vector<double>{0.5, 0.5}) == 0);
}

TEST_CASE("replay buffer: capacity, FIFO eviction, consistency") {
  ReplayBuffer buffer(5);
  Rng rng(3);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.state = random_state(rng);
    t.reward = i;
    t.done = true;
    buffer.push(std::move(t));
    CHECK(buffer.size() <= 5);
  }
  CHECK(buffer.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(buffer.at(i).reward == static_cast<double>(i + 3));
  for (const auto* t : buffer.sample(50, rng)) CHECK(t->reward >= 3.0);

  Transition bad;
  bad.state = random_state(rng);
  bad.done = false;  // but no next state
  CHECK_THROWS_AS(buffer.push(bad), ValidationError);
}

TEST_CASE("dqn targets: terminal and gamma = 0") {
  const auto target = tiny_qnet(4);
  Rng rng(5);
  Transition terminal;
  terminal.state = random_state(rng);
  terminal.reward = 1.0;
  terminal.done = true;
  Transition live;
  live.state = random_state(rng);
  live.reward = 0.25;
  live.next_state = random_state(rng);
  const std::vector<const Transition*> batch = {&terminal, &live};

  CHECK(dqn_targets(target, batch, 0.99)[0] == 1.0);
  const auto zero = dqn_targets(target, batch, 0.0);
  CHECK(zero == std::vector<double>{1.0, 0.25});

  const auto q_next = q_values(target, *live.next_state);
  const double expected = 0.25 + 0.99 * *std::max_element(q_next.begin(), q_next.end());
  CHECK(dqn_targets(target, batch, 0.99)[1] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("dqn_update: reproducible, target untouched, buffer precondition") {
  const auto cfg = small_dqn();
  const auto buffer = filled_buffer(6, 12, true);

  auto run = [&] {
    auto q = tiny_qnet(7);
    const auto target = tiny_qnet(8);
    Rng rng(9);
    std::vector<double> losses;
    for (long t = 1; t <= 5; ++t) losses.push_back(dqn_update(q, target, buffer, cfg, rng, t));
    return losses;
  };
  CHECK(run() == run());

  auto q = tiny_qnet(7);
  const auto target = tiny_qnet(8);
  const nn::ParameterSet before = target.params();
  const nn::ParameterSet online_before = q.params();
  Rng rng(9);
  const double loss = dqn_update(q, target, buffer, cfg, rng, 1);
  CHECK(std::isfinite(loss));
  CHECK(loss >= 0.0);
  CHECK(target.params().max_abs_difference(before) == 0.0);
  CHECK(q.params().max_abs_difference(online_before) > 0.0);

  auto small = cfg;
  small.warmup_steps = 20;
  CHECK_THROWS_AS(dqn_update(q, target, buffer, small, rng, 2), RuntimeFailure);
}

TEST_CASE("dqn_update with gamma = 0 regresses onto rewards") {
  // The MSE loss reported is the mean of (Q(s,a) - r)^2 over the sampled batch.
  auto cfg = small_dqn();
  cfg.gamma = 0.0;
  cfg.loss = DqnLoss::kMse;
  cfg.batch_size = 1;
  cfg.warmup_steps = 1;
  const auto buffer = filled_buffer(10, 1, false);
  auto q = tiny_qnet(11);
  const auto target = tiny_qnet(12);
  const auto& t = buffer.at(0);
  const double qa = q_values(q, t.state)[static_cast<std::size_t>(t.action)];
  Rng rng(13);
  CHECK(dqn_update(q, target, buffer, cfg, rng, 1) == doctest::Approx((qa - t.reward) * (qa - t.reward)).epsilon(1e-12));
}

TEST_CASE("target sync: equal after, differ after an update, idempotent") {
  auto q = tiny_qnet(14);
  auto target = tiny_qnet(15);
  CHECK(q.params().max_abs_difference(target.params()) > 0.0);
  target_sync(q, target);
  CHECK(q.params().max_abs_difference(target.params()) == 0.0);
  Rng rng(16);
  for (int i = 0; i < 5; ++i) {
    const auto s = random_state(rng);
    CHECK(q_values(q, s) == q_values(target, s));
  }
  target_sync(q, target);
  CHECK(q.params().max_abs_difference(target.params()) == 0.0);

  const auto buffer = filled_buffer(17, 8, true);
  dqn_update(q, target, buffer, small_dqn(), rng, 1);
  CHECK(q.params().max_abs_difference(target.params()) > 0.0);
}

TEST_CASE("GAE examples") {
  auto r = compute_gae(std::vector<double>{1, 1}, std::vector<double>{0, 0}, {false, true}, 1.0, 1.0, 0.0);
  CHECK(r.advantages == std::vector<double>{2, 1});
  CHECK(r.returns == std::vector<double>{2, 1});

  const std::vector<double> rewards = {0.5, -1, 2, 0.25};
  const std::vector<double> values = {0.1, 0.4, -0.3, 0.7};
  const std::vector<bool> dones = {false, true, false, false};
  r = compute_gae(rewards, values, dones, 0.9, 0.0, 1.5);
  const std::vector<double> next = {0.4, 0.0, 0.7, 1.5};
  for (std::size_t t = 0; t < 4; ++t) {
    const double delta = rewards[t] + 0.9 * next[t] * (dones[t] ? 0 : 1) - values[t];
    CHECK(r.advantages[t] == doctest::Approx(delta).epsilon(1e-15));
    CHECK(r.returns[t] == doctest::Approx(r.advantages[t] + values[t]).epsilon(1e-15));
  }

  r = compute_gae(std::vector<double>(3, 0.0), std::vector<double>(3, 0.0), {false, false, true}, 0.99, 0.95, 0.0);
  CHECK(r.advantages == std::vector<double>(3, 0.0));
  CHECK_THROWS_AS(compute_gae(std::vector<double>{1}, std::vector<double>{1, 2}, {true}, 1, 1, 0), ValidationError);
}

TEST_CASE("GAE with gamma = lambda = 1 equals suffix-sum returns minus values") {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> rewards(n), values(n);
    for (auto& x : rewards) x = rng.uniform(-1, 1);
    for (auto& x : values) x = rng.uniform(-1, 1);
    std::vector<bool> dones(n, false);
    dones.back() = true;
    const auto r = compute_gae(rewards, values, dones, 1.0, 1.0, 123.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double suffix = std::accumulate(rewards.begin() + static_cast<long>(t), rewards.end(), 0.0);
      CHECK(std::abs(r.advantages[t] - (suffix - values[t])) < 1e-12);
    }
  }
}

TEST_CASE("advantage normalization") {
  Rng rng(19);
  std::vector<double> a(37);
  for (auto& x : a) x = rng.uniform(-5, 20);
  normalize_advantages(a);
  const double mean = mean_of(a);
  double var = 0;
  for (const double x : a) var += (x - mean) * (x - mean);
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(var / static_cast<double>(a.size())) - 1) < 1e-9);

  std::vector<double> flat(4, 3.0);
  normalize_advantages(flat);
  CHECK(flat == std::vector<double>(4, 0.0));
}

TEST_CASE("PPO surrogate pieces") {
  CHECK(clipped_objective(1.5, 2.0, 0.2) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(clipped_objective(0.5, 2.0, 0.2) == 1.0);
  CHECK(clipped_objective(0.5, -2.0, 0.2) == doctest::Approx(-1.6).epsilon(1e-15));
  for (const std::size_t k : {2u, 4u, 7u}) {
    CHECK(categorical_entropy(std::vector<double>(k, 0.3)) ==
          doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-14));
  }
  Rng rng(20);
  std::vector<int> counts(3, 0);
  const std::vector<double> logits = {0.0, std::log(2.0), std::log(7.0)};
  for (int i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(sample_categorical(logits, rng))];
  const std::vector<double> probs = {0.1, 0.2, 0.7};
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(counts[j] - 10000 * probs[j]) < 3 * std::sqrt(10000 * probs[j] * (1 - probs[j])));
  }
}

namespace {

RolloutBatch random_batch(std::size_t n, std::size_t k, Rng& rng) {
  RolloutBatch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.states.push_back(random_state(rng));
    b.actions.push_back(static_cast<int>(rng.uniform_index(k)));
    b.rewards.push_back(rng.uniform(0, 1));
    b.dones.push_back(i + 1 == n);
    b.log_probs.push_back(std::log(1.0 / static_cast<double>(k)) + rng.uniform(-0.4, 0.4));
    b.values.push_back(rng.uniform(-1, 1));
    b.advantages.push_back(rng.normal());
    b.returns.push_back(rng.uniform(-1, 2));
  }
  return b;
}

}  // namespace

TEST_CASE("ppo loss at ratio 1 is -mean(A)") {
  Rng rng(21);
  const std::size_t n = 9, k = 4;
  auto batch = random_batch(n, k, rng);
  Tensor logits({n, k}), values({n, 1});
  for (auto& x : logits.data()) x = rng.normal();
  const Tensor lp = nn::log_softmax(logits);
  for (std::size_t i = 0; i < n; ++i) batch.log_probs[i] = lp(i, static_cast<std::size_t>(batch.actions[i]));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const auto loss = ppo_minibatch_loss(logits, values, batch, idx, PpoConfig{});
  CHECK(loss.parts.policy_loss == doctest::Approx(-mean_of(batch.advantages)).epsilon(1e-14));
}

TEST_CASE("ppo minibatch gradients match finite differences") {
  Rng rng(22);
  const std::size_t n = 12, k = 3;
  const auto batch = random_batch(n, k, rng);
  std::vector<std::size_t> idx = {3, 0, 7, 11, 5, 9};
  const std::size_t m = idx.size();
  PpoConfig cfg;
  cfg.entropy_coeff = 0.05;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor logits({m, k}), values({m, 1});
    for (auto& x : logits.data()) x = rng.uniform(-0.5, 0.5);
    for (auto& x : values.data()) x = rng.normal();
    const auto analytic = ppo_minibatch_loss(logits, values, batch, idx, cfg);
    const auto f = [&] { return ppo_minibatch_loss(logits, values, batch, idx, cfg).parts.total(cfg); };
    CHECK(nn::finite_difference_check(f, logits.data(), analytic.dlogits.data(), 1e-4).passed);
    CHECK(nn::finite_difference_check(f, values.data(), analytic.dvalues.data(), 1e-4).passed);
  }
}

TEST_CASE("ppo_update: runs, is deterministic, rejects NaN advantages") {
  Rng init(23);
  const std::size_t k = 3;
  const auto make_net = [&] {
    Rng r(24);
    return PolicyValueNetwork(tiny_encoder(), fusion::VisualSpec::features(kFeat), kVocab, static_cast<int>(k), 8, r);
  };
  const auto batch = random_batch(20, k, init);
  PpoConfig cfg;
  cfg.minibatch_size = 8;
  cfg.epochs = 2;

  auto net_a = make_net(), net_b = make_net();
  auto batch_a = batch, batch_b = batch;
  Rng ra(25), rb(25);
  long step_a = 0, step_b = 0;
  const auto pa = ppo_update(net_a, batch_a, cfg, ra, step_a);
  const auto pb = ppo_update(net_b, batch_b, cfg, rb, step_b);
  CHECK(step_a == 2 * 3);
  CHECK(pa.policy_loss == pb.policy_loss);
  CHECK(pa.value_loss == pb.value_loss);
  CHECK(net_a.params().max_abs_difference(net_b.params()) == 0.0);
  CHECK(net_a.params().max_abs_difference(make_net().params()) > 0.0);

  auto bad = batch;
  bad.advantages[4] = std::nan("");
  CHECK_THROWS_AS(ppo_update(net_a, bad, cfg, ra, step_a), RuntimeFailure);
}
