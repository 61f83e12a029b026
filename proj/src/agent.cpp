#include "sagin/agent.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sagin {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay: capacity must be positive");
  storage_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (storage_.size() < n) throw std::logic_error("replay: not enough transitions to sample");
  std::vector<const Transition*> batch(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch[i] = &storage_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(storage_.size())))];
  }
  return batch;
}

double policy_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

ActorCriticAgent::ActorCriticAgent(int obs_size, int action_count, const AgentConfig& cfg,
                                   std::uint64_t seed)
    : cfg_(cfg),
      action_count_(action_count),
      actor_(Mlp::xavier([&] {
               std::vector<int> sizes{obs_size};
               sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
               sizes.push_back(action_count);
               return sizes;
             }(),
             Head::Softmax, derive_seed(seed, 11))),
      critic_(Mlp::xavier(actor_.sizes, Head::Identity, derive_seed(seed, 12))),
      target_(critic_),
      actor_adam_(AdamState::for_net(actor_, cfg.learning_rate)),
      critic_adam_(AdamState::for_net(critic_, cfg.learning_rate)),
      replay_(static_cast<std::size_t>(cfg.replay_capacity)),
      rng_(derive_seed(seed, 13)) {
  if (cfg_.batch_size < 1) throw std::invalid_argument("agent: batch_size must be >= 1");
  if (cfg_.warmup < cfg_.batch_size) cfg_.warmup = cfg_.batch_size;
  // near-uniform starting policy: damp the logit head
  for (double& w : actor_.weights.back()) w *= 0.01;
}

int greedy_action(const Mlp& net, std::span<const double> obs) {
  const std::vector<double> scores = mlp_forward(net, obs);
  int best = 0;
  for (int a = 1; a < static_cast<int>(scores.size()); ++a) {
    if (scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

int sample_action(const Mlp& actor, std::span<const double> obs, Rng& rng) {
  const std::vector<double> probs = mlp_forward(actor, obs);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (u < cumulative) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::vector<double> ActorCriticAgent::policy(std::span<const double> obs) const {
  return mlp_forward(actor_, obs);
}

int ActorCriticAgent::select_action(std::span<const double> obs, ActionMode mode) {
  if (mode == ActionMode::Greedy) return greedy_action(actor_, obs);
  return sample_action(actor_, obs, rng_);
}

double ActorCriticAgent::td_target(const Transition& t) const {
  if (t.done) return t.reward;
  const std::vector<double> next_probs = mlp_forward(actor_, t.next_observation);
  const std::vector<double> next_q = mlp_forward(target_, t.next_observation);
  double expected = 0.0;
  for (int a = 0; a < action_count_; ++a) {
    expected += next_probs[static_cast<std::size_t>(a)] * next_q[static_cast<std::size_t>(a)];
  }
  return t.reward + cfg_.discount * expected;
}

bool ActorCriticAgent::ready_to_update() const {
  return replay_.size() >= static_cast<std::size_t>(cfg_.warmup);
}

UpdateStats ActorCriticAgent::update_from_replay() {
  if (!ready_to_update()) {
    throw std::logic_error("agent: update requested before warmup completed");
  }
  const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
  return update_on_batch(batch);
}

UpdateStats ActorCriticAgent::update_on_batch(std::span<const Transition* const> batch) {
  if (batch.empty()) throw std::invalid_argument("agent: empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  Gradients critic_grads = Gradients::zeros_like(critic_);
  Gradients actor_grads = Gradients::zeros_like(actor_);
  std::vector<double> critic_out_grad(static_cast<std::size_t>(action_count_));
  std::vector<double> actor_out_grad(static_cast<std::size_t>(action_count_));

  UpdateStats stats;
  for (const Transition* t : batch) {
    const double target = td_target(*t);

    // Critic regression toward the bootstrap target at the taken action.
    const ForwardCache critic_cache = mlp_forward_cached(critic_, t->observation);
    const double q_taken = critic_cache.output[static_cast<std::size_t>(t->action)];
    const double td_error = target - q_taken;
    stats.critic_loss += td_error * td_error * inv_batch;
    std::fill(critic_out_grad.begin(), critic_out_grad.end(), 0.0);
    critic_out_grad[static_cast<std::size_t>(t->action)] = -2.0 * td_error * inv_batch;
    mlp_backward_into(critic_, critic_cache, critic_out_grad, critic_grads);

    // Policy gradient weighted by the TD residual, entropy-regularized. The
    // residual enters as a constant; no gradient flows through the critic.
    const ForwardCache actor_cache = mlp_forward_cached(actor_, t->observation);
    const std::vector<double>& probs = actor_cache.output;
    const double entropy = policy_entropy(probs);
    stats.mean_entropy += entropy * inv_batch;
    double advantage = td_error;
    if (cfg_.advantage_baseline) {
      double value = 0.0;
      for (int a = 0; a < action_count_; ++a) {
        value += probs[static_cast<std::size_t>(a)] *
                 critic_cache.output[static_cast<std::size_t>(a)];
      }
      advantage = target - value;
    }
    const double p_taken =
        std::max(probs[static_cast<std::size_t>(t->action)], 1e-12);
    stats.actor_loss -=
        (std::log(p_taken) * advantage + cfg_.entropy_coef * entropy) * inv_batch;
    for (int a = 0; a < action_count_; ++a) {
      const double p = std::max(probs[static_cast<std::size_t>(a)], 1e-12);
      double g = cfg_.entropy_coef * (std::log(p) + 1.0);
      if (a == t->action) g -= advantage / p_taken;
      actor_out_grad[static_cast<std::size_t>(a)] = g * inv_batch;
    }
    mlp_backward_into(actor_, actor_cache, actor_out_grad, actor_grads);
  }

  adam_step(critic_, critic_grads, critic_adam_);
  adam_step(actor_, actor_grads, actor_adam_);
  soft_update(critic_, target_, cfg_.target_tau);
  return stats;
}

void ActorCriticAgent::save(std::ostream& out) const {
  save_mlp(actor_, out);
  save_mlp(critic_, out);
  save_mlp(target_, out);
}

void ActorCriticAgent::load(std::istream& in) {
  actor_ = load_mlp(in);
  critic_ = load_mlp(in);
  target_ = load_mlp(in);
  actor_adam_ = AdamState::for_net(actor_, cfg_.learning_rate);
  critic_adam_ = AdamState::for_net(critic_, cfg_.learning_rate);
}

TrainResult train_actor_critic(const EnvFactory& make_env, const AgentConfig& cfg,
                               int episodes, int steps_per_episode, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
  Env env = make_env(derive_seed(seed, 21));
  ActorCriticAgent agent(kObservationDim, kActionCount, cfg, derive_seed(seed, 22));

  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(episodes));
  for (int episode = 0; episode < episodes; ++episode) {
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    for (int step = 0; step < steps_per_episode; ++step) {
      const int action = agent.select_action(obs, ActionMode::Sample);
      StepOutcome outcome = env.step(ActionIndex{action});
      acc.add(ActionIndex{action}, outcome);
      agent.observe(Transition{std::move(obs), action, outcome.reward,
                               outcome.observation, outcome.done});
      obs = std::move(outcome.observation);
      if (agent.ready_to_update()) agent.update_from_replay();
      if (outcome.done) break;
    }
    records.push_back(acc.finalize(episode));
  }
  return TrainResult{std::move(agent), std::move(records)};
}

}  // namespace sagin
