#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "sagin/agent.hpp"
#include "sagin/env.hpp"
#include "sagin/metrics.hpp"
#include "sagin/nn.hpp"
#include "sagin/rng.hpp"

namespace sagin {

enum class PolicyKind { Random, RoundRobin, GreedySnr, BsOnly, Dqn, Ppo, Proposed };

inline constexpr std::array<PolicyKind, 7> kAllPolicies{
    PolicyKind::Random,  PolicyKind::RoundRobin, PolicyKind::GreedySnr,
    PolicyKind::BsOnly,  PolicyKind::Dqn,        PolicyKind::Ppo,
    PolicyKind::Proposed};

const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);
bool is_learning_policy(PolicyKind kind);

// Common decision interface: every policy maps the shared observation to one
// of the 15 subset actions.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() {}
  virtual ActionIndex act(const Observation& obs, int step_index) = 0;
};

// Uniform over the 15 non-empty subsets.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  ActionIndex act(const Observation&, int) override {
    return ActionIndex{rng_.uniform_int(kActionCount)};
  }

 private:
  Rng rng_;
};

// Cycles the four singleton subsets BS -> UAV -> HAP -> LEO.
class RoundRobinPolicy : public Policy {
 public:
  ActionIndex act(const Observation&, int step_index) override;
};

// Singleton subset of the link with the highest last-observed SNR. Links
// start optimistically high so each gets probed at least once; the estimate
// of a link refreshes only while that link is selected.
class GreedySnrPolicy : public Policy {
 public:
  GreedySnrPolicy();
  ActionIndex act(const Observation& obs, int step_index) override;

  static ActionIndex argmax_singleton(std::span<const double> snr);

 private:
  std::array<double, kLinkCount> last_snr_{};
};

class BsOnlyPolicy : public Policy {
 public:
  ActionIndex act(const Observation&, int) override { return ActionIndex{0}; }
};

// Greedy wrapper over a trained softmax actor (or Q net).
class GreedyNetPolicy : public Policy {
 public:
  explicit GreedyNetPolicy(Mlp net) : net_(std::move(net)) {}
  ActionIndex act(const Observation& obs, int) override;
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
};

struct DqnConfig {
  double discount = 0.99;
  double learning_rate = 1e-3;
  int replay_capacity = 10000;
  int batch_size = 64;
  int target_copy_interval = 500;  // environment steps between hard copies
  double epsilon_start = 1.0;
  double epsilon_final = 0.05;
  double anneal_fraction = 0.5;  // fraction of episodes to reach the floor
  std::vector<int> hidden = {64, 64};
};

double dqn_epsilon(const DqnConfig& cfg, int episode, int total_episodes);

// Deep Q-learning over the shared MLP substrate: epsilon-greedy behavior,
// uniform replay, hard target copies, max-bootstrap squared TD loss.
class DqnAgent {
 public:
  DqnAgent(int obs_size, int action_count, const DqnConfig& cfg, std::uint64_t seed);

  int select_action(std::span<const double> obs, double epsilon);
  int greedy_action(std::span<const double> obs) const;
  void observe(Transition t) { replay_.push(std::move(t)); }
  bool ready_to_update() const {
    return replay_.size() >= static_cast<std::size_t>(cfg_.batch_size);
  }
  double update();  // one batch; returns loss. Hard-copies the target on schedule.
  const Mlp& q_net() const { return q_; }

 private:
  DqnConfig cfg_;
  int action_count_;
  Mlp q_;
  Mlp target_;
  AdamState adam_;
  ReplayBuffer replay_;
  Rng rng_;
  long env_steps_ = 0;
};

struct PpoConfig {
  double discount = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double learning_rate = 1e-3;
  int rollout_steps = 2048;
  int epochs = 4;
  int minibatch = 256;
  std::vector<int> hidden = {64, 64};
};

// One-step TD residuals chained by gamma * lambda, with done masking.
// `values` holds V(s_0..s_T) (one extra bootstrap entry).
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   const std::vector<bool>& dones, double discount,
                                   double lambda);

// In-place: zero mean, unit variance (population); no-op on degenerate input.
void normalize_advantages(std::vector<double>& advantages);

struct PolicyTrainResult {
  std::unique_ptr<Policy> policy;
  std::vector<EpisodeRecord> records;
};

PolicyTrainResult dqn_train(const EnvFactory& make_env, const DqnConfig& cfg,
                            int episodes, int steps_per_episode, std::uint64_t seed);
PolicyTrainResult ppo_train(const EnvFactory& make_env, const PpoConfig& cfg,
                            int episodes, int steps_per_episode, std::uint64_t seed);

}  // namespace sagin
