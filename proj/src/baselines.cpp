#include "sagin/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sagin {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "random";
    case PolicyKind::RoundRobin: return "round_robin";
    case PolicyKind::GreedySnr: return "greedy_snr";
    case PolicyKind::BsOnly: return "bs_only";
    case PolicyKind::Dqn: return "dqn";
    case PolicyKind::Ppo: return "ppo";
    case PolicyKind::Proposed: return "proposed";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (PolicyKind kind : kAllPolicies) {
    if (name == policy_name(kind)) return kind;
  }
  return std::nullopt;
}

bool is_learning_policy(PolicyKind kind) {
  return kind == PolicyKind::Dqn || kind == PolicyKind::Ppo || kind == PolicyKind::Proposed;
}

ActionIndex RoundRobinPolicy::act(const Observation&, int step_index) {
  const int link = step_index % kLinkCount;
  return ActionIndex{(1 << link) - 1};
}

GreedySnrPolicy::GreedySnrPolicy() {
  // +30 dB is far above anything the channel produces, so every link wins
  // the argmax until it has been tried once.
  last_snr_.fill(normalized_snr(30.0));
}

ActionIndex GreedySnrPolicy::argmax_singleton(std::span<const double> snr) {
  int best = 0;
  for (int k = 1; k < kLinkCount; ++k) {
    if (snr[static_cast<std::size_t>(k)] > snr[static_cast<std::size_t>(best)]) best = k;
  }
  return ActionIndex{(1 << best) - 1};
}

ActionIndex GreedySnrPolicy::act(const Observation& obs, int) {
  for (int k = 0; k < kLinkCount; ++k) {
    const double* f = obs.data() + static_cast<std::size_t>(k) * kFeaturesPerLink;
    if (f[0] == 1.0) last_snr_[static_cast<std::size_t>(k)] = f[1];
  }
  return argmax_singleton(last_snr_);
}

ActionIndex GreedyNetPolicy::act(const Observation& obs, int) {
  return ActionIndex{greedy_action(net_, obs)};
}

double dqn_epsilon(const DqnConfig& cfg, int episode, int total_episodes) {
  const double horizon = cfg.anneal_fraction * static_cast<double>(total_episodes);
  if (horizon <= 0.0) return cfg.epsilon_final;
  const double t = std::min(1.0, static_cast<double>(episode) / horizon);
  return cfg.epsilon_start + t * (cfg.epsilon_final - cfg.epsilon_start);
}

DqnAgent::DqnAgent(int obs_size, int action_count, const DqnConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      action_count_(action_count),
      q_(Mlp::xavier([&] {
           std::vector<int> sizes{obs_size};
           sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
           sizes.push_back(action_count);
           return sizes;
         }(),
         Head::Identity, derive_seed(seed, 31))),
      target_(q_),
      adam_(AdamState::for_net(q_, cfg.learning_rate)),
      replay_(static_cast<std::size_t>(cfg.replay_capacity)),
      rng_(derive_seed(seed, 32)) {}

int DqnAgent::greedy_action(std::span<const double> obs) const {
  return sagin::greedy_action(q_, obs);
}

int DqnAgent::select_action(std::span<const double> obs, double epsilon) {
  ++env_steps_;
  if (rng_.uniform() < epsilon) return rng_.uniform_int(action_count_);
  return greedy_action(obs);
}

double DqnAgent::update() {
  if (!ready_to_update()) throw std::logic_error("dqn: not enough transitions");
  const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  Gradients grads = Gradients::zeros_like(q_);
  std::vector<double> out_grad(static_cast<std::size_t>(action_count_));
  double loss = 0.0;
  for (const Transition* t : batch) {
    double target = t->reward;
    if (!t->done) {
      const std::vector<double> next_q = mlp_forward(target_, t->next_observation);
      target += cfg_.discount * *std::max_element(next_q.begin(), next_q.end());
    }
    const ForwardCache cache = mlp_forward_cached(q_, t->observation);
    const double td_error = target - cache.output[static_cast<std::size_t>(t->action)];
    loss += td_error * td_error * inv_batch;
    std::fill(out_grad.begin(), out_grad.end(), 0.0);
    out_grad[static_cast<std::size_t>(t->action)] = -2.0 * td_error * inv_batch;
    mlp_backward_into(q_, cache, out_grad, grads);
  }
  adam_step(q_, grads, adam_);
  if (env_steps_ % cfg_.target_copy_interval == 0) target_ = q_;
  return loss;
}

PolicyTrainResult dqn_train(const EnvFactory& make_env, const DqnConfig& cfg,
                            int episodes, int steps_per_episode, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("dqn_train: episodes must be >= 1");
  Env env = make_env(derive_seed(seed, 21));
  DqnAgent agent(kObservationDim, kActionCount, cfg, derive_seed(seed, 22));

  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(episodes));
  for (int episode = 0; episode < episodes; ++episode) {
    const double epsilon = dqn_epsilon(cfg, episode, episodes);
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    for (int step = 0; step < steps_per_episode; ++step) {
      const int action = agent.select_action(obs, epsilon);
      StepOutcome outcome = env.step(ActionIndex{action});
      acc.add(ActionIndex{action}, outcome);
      agent.observe(Transition{std::move(obs), action, outcome.reward,
                               outcome.observation, outcome.done});
      obs = std::move(outcome.observation);
      if (agent.ready_to_update()) agent.update();
      if (outcome.done) break;
    }
    records.push_back(acc.finalize(episode));
  }
  return PolicyTrainResult{std::make_unique<GreedyNetPolicy>(agent.q_net()),
                           std::move(records)};
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   const std::vector<bool>& dones, double discount,
                                   double lambda) {
  if (values.size() != rewards.size() + 1 || dones.size() != rewards.size()) {
    throw std::invalid_argument("gae: length mismatch");
  }
  std::vector<double> advantages(rewards.size());
  double carry = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double mask = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + discount * values[i + 1] * mask - values[i];
    carry = delta + discount * lambda * mask * carry;
    advantages[i] = carry;
  }
  return advantages;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  if (var < 1e-24) {
    for (double& a : advantages) a = 0.0;
    return;
  }
  const double inv_std = 1.0 / std::sqrt(var);
  for (double& a : advantages) a = (a - mean) * inv_std;
}

namespace {

struct RolloutBuffer {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<double> old_probs;  // pi_old(a|s) of the taken action
  std::vector<double> values;     // V(s), plus one bootstrap entry at flush

  void clear() {
    observations.clear();
    actions.clear();
    rewards.clear();
    dones.clear();
    old_probs.clear();
    values.clear();
  }
  std::size_t size() const { return actions.size(); }
};

}  // namespace

PolicyTrainResult ppo_train(const EnvFactory& make_env, const PpoConfig& cfg,
                            int episodes, int steps_per_episode, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("ppo_train: episodes must be >= 1");
  Env env = make_env(derive_seed(seed, 21));

  std::vector<int> actor_sizes{kObservationDim};
  actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  std::vector<int> value_sizes = actor_sizes;
  actor_sizes.push_back(kActionCount);
  value_sizes.push_back(1);
  Mlp actor = Mlp::xavier(actor_sizes, Head::Softmax, derive_seed(seed, 41));
  for (double& w : actor.weights.back()) w *= 0.01;  // near-uniform start
  Mlp value_net = Mlp::xavier(value_sizes, Head::Identity, derive_seed(seed, 42));
  AdamState actor_adam = AdamState::for_net(actor, cfg.learning_rate);
  AdamState value_adam = AdamState::for_net(value_net, cfg.learning_rate);
  Rng rng(derive_seed(seed, 43));

  RolloutBuffer rollout;
  std::vector<double> actor_out_grad(static_cast<std::size_t>(kActionCount));

  const auto update_from_rollout = [&](const Observation& bootstrap_obs) {
    rollout.values.push_back(mlp_forward(value_net, bootstrap_obs)[0]);
    std::vector<double> advantages =
        gae_advantages(rollout.rewards, rollout.values, rollout.dones, cfg.discount,
                       cfg.gae_lambda);
    std::vector<double> returns(advantages.size());
    for (std::size_t i = 0; i < advantages.size(); ++i) {
      returns[i] = advantages[i] + rollout.values[i];
    }
    normalize_advantages(advantages);

    std::vector<std::size_t> order(rollout.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      // Fisher-Yates with the training stream
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
      }
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.minibatch)) {
        const std::size_t stop =
            std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
        const double inv_mb = 1.0 / static_cast<double>(stop - start);
        Gradients actor_grads = Gradients::zeros_like(actor);
        Gradients value_grads = Gradients::zeros_like(value_net);
        for (std::size_t j = start; j < stop; ++j) {
          const std::size_t i = order[j];
          const Observation& obs = rollout.observations[i];
          const int action = rollout.actions[i];
          const double advantage = advantages[i];

          // Clipped surrogate. The gradient flows only while the ratio is
          // inside the clip region or moving back toward it.
          const ForwardCache actor_cache = mlp_forward_cached(actor, obs);
          const std::vector<double>& probs = actor_cache.output;
          const double p_old = std::max(rollout.old_probs[i], 1e-12);
          const double p_new = std::max(probs[static_cast<std::size_t>(action)], 1e-12);
          const double ratio = p_new / p_old;
          const bool clipped_out = (advantage > 0.0 && ratio > 1.0 + cfg.clip) ||
                                   (advantage < 0.0 && ratio < 1.0 - cfg.clip);
          for (int a = 0; a < kActionCount; ++a) {
            const double p = std::max(probs[static_cast<std::size_t>(a)], 1e-12);
            double g = cfg.entropy_coef * (std::log(p) + 1.0);
            if (!clipped_out && a == action) g -= advantage / p_old;
            actor_out_grad[static_cast<std::size_t>(a)] = g * inv_mb;
          }
          mlp_backward_into(actor, actor_cache, actor_out_grad, actor_grads);

          const ForwardCache value_cache = mlp_forward_cached(value_net, obs);
          const double value_error = value_cache.output[0] - returns[i];
          const double value_grad = cfg.value_coef * 2.0 * value_error * inv_mb;
          mlp_backward_into(value_net, value_cache, std::span(&value_grad, 1), value_grads);
        }
        adam_step(actor, actor_grads, actor_adam);
        adam_step(value_net, value_grads, value_adam);
      }
    }
    rollout.clear();
  };

  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(episodes));
  for (int episode = 0; episode < episodes; ++episode) {
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    for (int step = 0; step < steps_per_episode; ++step) {
      const std::vector<double> probs = mlp_forward(actor, obs);
      const double u = rng.uniform();
      int action = kActionCount - 1;
      double cumulative = 0.0;
      for (int a = 0; a < kActionCount; ++a) {
        cumulative += probs[static_cast<std::size_t>(a)];
        if (u < cumulative) {
          action = a;
          break;
        }
      }
      StepOutcome outcome = env.step(ActionIndex{action});
      acc.add(ActionIndex{action}, outcome);
      rollout.observations.push_back(obs);
      rollout.actions.push_back(action);
      rollout.rewards.push_back(outcome.reward);
      rollout.dones.push_back(outcome.done);
      rollout.old_probs.push_back(probs[static_cast<std::size_t>(action)]);
      rollout.values.push_back(mlp_forward(value_net, obs)[0]);
      obs = std::move(outcome.observation);
      if (rollout.size() >= static_cast<std::size_t>(cfg.rollout_steps)) {
        update_from_rollout(obs);
      }
      if (outcome.done) break;
    }
    records.push_back(acc.finalize(episode));
  }
  return PolicyTrainResult{std::make_unique<GreedyNetPolicy>(std::move(actor)),
                           std::move(records)};
}

}  // namespace sagin
