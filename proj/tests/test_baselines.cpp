#include <stdexcept>
#include <array>
#include <cmath>

#include <doctest.h>

#include "sagin/baselines.hpp"
#include "sagin/harness.hpp"

using namespace sagin;

TEST_CASE("policy names round trip") {
  for (PolicyKind kind : kAllPolicies) {
    CHECK(parse_policy(policy_name(kind)) == kind);
  }
  CHECK_FALSE(parse_policy("nonsense").has_value());
}

TEST_CASE("random policy is uniform over the 15 subsets") {
  RandomPolicy policy(77);
  const Observation obs(kObservationDim, 0.0);
  std::array<int, kActionCount> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const ActionIndex a = policy.act(obs, i);
    CHECK(a.index >= 0);
    CHECK(a.index < kActionCount);
    ++counts[static_cast<std::size_t>(a.index)];
  }
  for (int c : counts) {
    CHECK(std::abs(static_cast<double>(c) / draws - 1.0 / 15.0) < 0.01);
  }
  // seed-deterministic
  RandomPolicy again_a(123), again_b(123);
  for (int i = 0; i < 50; ++i) CHECK(again_a.act(obs, i).index == again_b.act(obs, i).index);
}

TEST_CASE("round robin cycles the four singleton links") {
  RoundRobinPolicy policy;
  const Observation obs(kObservationDim, 0.0);
  CHECK(policy.act(obs, 0).bitmask() == 0b0001);
  CHECK(policy.act(obs, 1).bitmask() == 0b0010);
  CHECK(policy.act(obs, 2).bitmask() == 0b0100);
  CHECK(policy.act(obs, 3).bitmask() == 0b1000);
  CHECK(policy.act(obs, 4).bitmask() == 0b0001);
  for (int step = 0; step < 64; ++step) CHECK(policy.act(obs, step).link_count() == 1);
}

TEST_CASE("greedy snr argmax rule") {
  CHECK(GreedySnrPolicy::argmax_singleton(std::array{10.0, 20.0, 15.0, 5.0}).bitmask() ==
        0b0010);
  CHECK(GreedySnrPolicy::argmax_singleton(std::array{7.0, 7.0, 7.0, 7.0}).bitmask() ==
        0b0001);
  // brute-force comparison on random vectors
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 4> snr{};
    for (double& v : snr) v = rng.uniform(-40.0, 40.0);
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (snr[static_cast<std::size_t>(k)] > snr[static_cast<std::size_t>(best)]) best = k;
    }
    CHECK(GreedySnrPolicy::argmax_singleton(snr).bitmask() == (1u << best));
  }
}

TEST_CASE("greedy snr probes every link once then tracks observations") {
  GreedySnrPolicy policy;
  Observation obs(kObservationDim, 0.0);
  // optimistic start: ties resolve lowest-first, so the order is BS..LEO
  std::array<bool, 4> seen{};
  for (int step = 0; step < 4; ++step) {
    const ActionIndex a = policy.act(obs, step);
    CHECK(a.link_count() == 1);
    const int link = static_cast<int>(std::log2(static_cast<double>(a.bitmask())));
    CHECK_FALSE(seen[static_cast<std::size_t>(link)]);
    seen[static_cast<std::size_t>(link)] = true;
    // feed back a low observed snr for the probed link
    obs.assign(kObservationDim, 0.0);
    obs[static_cast<std::size_t>(link * kFeaturesPerLink)] = 1.0;
    obs[static_cast<std::size_t>(link * kFeaturesPerLink + 1)] = normalized_snr(-20.0 + link);
  }
  // all probed: now the argmax of the remembered values (LEO got -17 dB)
  CHECK(policy.act(obs, 4).bitmask() == 0b1000);
}

TEST_CASE("bs only policy is constant") {
  BsOnlyPolicy policy;
  const Observation obs(kObservationDim, 0.0);
  for (int step = 0; step < 100; ++step) {
    const ActionIndex a = policy.act(obs, step);
    CHECK(a.index == 0);
    CHECK(a.bitmask() == 0b0001);
  }
}

TEST_CASE("dqn epsilon anneals linearly to the floor") {
  const DqnConfig cfg;
  CHECK(dqn_epsilon(cfg, 0, 2000) == doctest::Approx(1.0));
  CHECK(dqn_epsilon(cfg, 500, 2000) == doctest::Approx(0.525));
  CHECK(dqn_epsilon(cfg, 1000, 2000) == doctest::Approx(0.05));
  CHECK(dqn_epsilon(cfg, 1999, 2000) == doctest::Approx(0.05));
}

TEST_CASE("dqn recovers the toy optimum") {
  // s0: a0 -> 0.0 go s1 | a1 -> 0.1 stay; s1: a0 -> 0.0 stay | a1 -> 1.0 go s0
  const auto encode = [](int s) {
    return s == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  DqnConfig cfg;
  cfg.hidden = {32, 32};
  DqnAgent agent(2, 2, cfg, 71);
  int state = 0;
  for (int update = 0; update < 20000;) {
    const std::vector<double> obs = encode(state);
    const int action = agent.select_action(obs, 0.2);
    const double reward = (state == 0) ? (action == 0 ? 0.0 : 0.1)
                                       : (action == 0 ? 0.0 : 1.0);
    const int next = (state == 0) ? (action == 0 ? 1 : 0) : (action == 0 ? 1 : 0);
    agent.observe(Transition{obs, action, reward, encode(next), false});
    state = next;
    if (agent.ready_to_update()) {
      agent.update();
      ++update;
    }
  }
  CHECK(agent.greedy_action(encode(0)) == 0);
  CHECK(agent.greedy_action(encode(1)) == 1);
}

TEST_CASE("gae reduces to one-step td residuals at lambda zero") {
  const std::vector<double> rewards{1.0, 0.5, -0.25, 2.0};
  const std::vector<double> values{0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<bool> dones{false, false, true, false};
  const double discount = 0.9;
  const std::vector<double> adv =
      gae_advantages(rewards, values, dones, discount, 0.0);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const double mask = dones[i] ? 0.0 : 1.0;
    const double expected = rewards[i] + discount * values[i + 1] * mask - values[i];
    CHECK(adv[i] == doctest::Approx(expected));
  }
}

TEST_CASE("gae telescopes a done boundary") {
  const std::vector<double> rewards{1.0, 1.0, 1.0};
  const std::vector<double> values{0.0, 0.0, 0.0, 5.0};
  const std::vector<bool> dones{false, true, false};
  const std::vector<double> adv = gae_advantages(rewards, values, dones, 0.99, 0.95);
  // the terminal at index 1 cuts the chain: adv[0] couples only to adv[1]
  CHECK(adv[1] == doctest::Approx(1.0));
  CHECK(adv[0] == doctest::Approx(1.0 + 0.99 * 0.95 * 1.0));
  CHECK(adv[2] == doctest::Approx(1.0 + 0.99 * 5.0));
}

TEST_CASE("advantage normalization is exactly standardized") {
  Rng rng(81);
  std::vector<double> adv(512);
  for (double& v : adv) v = rng.uniform(-3.0, 7.0);
  normalize_advantages(adv);
  double mean = 0.0;
  for (double v : adv) mean += v;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double v : adv) var += (v - mean) * (v - mean);
  var /= static_cast<double>(adv.size());
  CHECK(std::abs(mean) <= 1e-9);
  CHECK(std::abs(var - 1.0) <= 1e-6);

  std::vector<double> flat(32, 4.2);
  normalize_advantages(flat);
  for (double v : flat) CHECK(v == 0.0);
}

TEST_CASE("every policy runs one episode through the shared harness path") {
  ExperimentConfig cfg;
  cfg.episodes = 1;
  cfg.steps_per_episode = 50;
  const EnvConfig env_cfg = make_env_config(cfg);

  std::vector<std::unique_ptr<Policy>> policies;
  policies.push_back(std::make_unique<RandomPolicy>(1));
  policies.push_back(std::make_unique<RoundRobinPolicy>());
  policies.push_back(std::make_unique<GreedySnrPolicy>());
  policies.push_back(std::make_unique<BsOnlyPolicy>());
  policies.push_back(std::make_unique<GreedyNetPolicy>(
      Mlp::xavier({kObservationDim, 16, kActionCount}, Head::Softmax, 2)));

  for (auto& policy : policies) {
    Env env(env_cfg, 1717);
    const std::vector<EpisodeRecord> records = run_policy_episodes(*policy, env, 1, 50);
    REQUIRE(records.size() == 1);
    CHECK(records[0].switch_rate >= 0.0);
    CHECK(records[0].switch_rate <= 1.0);
    CHECK(std::isfinite(records[0].episode_return));
    CHECK(records[0].mean_power_w >= 2.0);
    CHECK(records[0].mean_power_w <= 14.0);
  }
}
