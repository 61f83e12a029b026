#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sagin/env.hpp"
#include "sagin/metrics.hpp"
#include "sagin/nn.hpp"
#include "sagin/rng.hpp"

namespace sagin {

struct AgentConfig {
  double discount = 0.99;
  double entropy_coef = 0.01;
  double learning_rate = 1e-3;
  double target_tau = 0.005;
  int replay_capacity = 10000;
  int batch_size = 64;
  int warmup = 500;
  std::vector<int> hidden = {64, 64};
  // Weight the policy gradient by td_target - V(s) with V(s) = E_pi[Q(s,.)]
  // instead of td_target - Q(s,a). The taken-action residual goes to zero
  // in expectation as the critic converges, which starves the actor of any
  // signal; the value-baseline form keeps the true advantage.
  bool advantage_baseline = true;
};

struct Transition {
  std::vector<double> observation;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_observation;
  bool done = false;
};

// Bounded ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> storage_;
};

enum class ActionMode { Sample, Greedy };

// Argmax over the net's outputs; ties break toward the lowest index.
int greedy_action(const Mlp& net, std::span<const double> obs);
// Draw from the actor's softmax distribution.
int sample_action(const Mlp& actor, std::span<const double> obs, Rng& rng);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_entropy = 0.0;
};

// Actor-critic learner over a discrete action set: stochastic softmax policy,
// a critic with one value head per action, and a slowly tracking target
// critic for bootstrap targets. One Adam step per update for each net.
class ActorCriticAgent {
 public:
  ActorCriticAgent(int obs_size, int action_count, const AgentConfig& cfg,
                   std::uint64_t seed);

  int select_action(std::span<const double> obs, ActionMode mode);
  std::vector<double> policy(std::span<const double> obs) const;

  // Bootstrap target: r for terminal transitions, otherwise r plus the
  // discounted policy expectation of the target critic at the next state.
  double td_target(const Transition& t) const;

  void observe(Transition t) { replay_.push(std::move(t)); }
  bool ready_to_update() const;
  UpdateStats update_from_replay();  // throws before warmup
  UpdateStats update_on_batch(std::span<const Transition* const> batch);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_critic() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  const AgentConfig& config() const { return cfg_; }
  int action_count() const { return action_count_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  AgentConfig cfg_;
  int action_count_;
  Mlp actor_;
  Mlp critic_;
  Mlp target_;
  AdamState actor_adam_;
  AdamState critic_adam_;
  ReplayBuffer replay_;
  Rng rng_;
};

// Policy entropy in nats.
double policy_entropy(std::span<const double> probs);

using EnvFactory = std::function<Env(std::uint64_t)>;

struct TrainResult {
  ActorCriticAgent agent;
  std::vector<EpisodeRecord> records;
};

// Interaction loop: sample an action, step the environment, store the
// transition, and run one update per step once the warmup has filled.
TrainResult train_actor_critic(const EnvFactory& make_env, const AgentConfig& cfg,
                               int episodes, int steps_per_episode, std::uint64_t seed);

}  // namespace sagin
