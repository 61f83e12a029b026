#include "sagin/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sagin {

const char* traffic_class_name(TrafficClass c) {
  switch (c) {
    case TrafficClass::Embb: return "eMBB";
    case TrafficClass::Hrllc: return "HRLLC";
    case TrafficClass::Mmtc: return "mMTC";
  }
  return "?";
}

QosRequirement QosRequirement::preset(TrafficClass c) {
  switch (c) {
    case TrafficClass::Embb: return {100e6, 10e-3, 14.0, c};
    case TrafficClass::Hrllc: return {10e6, 2e-3, 14.0, c};
    case TrafficClass::Mmtc: return {1e6, 100e-3, 14.0, c};
  }
  return {};
}

LinkStateVector availability_flags(const LinkMetricsTable& metrics,
                                   const QosRequirement& qos) {
  LinkStateVector state;
  const double capacity_share = qos.min_capacity_bps / kLinkCount;
  for (int i = 0; i < kLinkCount; ++i) {
    const LinkMetrics& m = metrics[static_cast<std::size_t>(i)];
    const bool available = m.capacity_bps >= capacity_share &&
                           m.latency_s <= qos.max_latency_s && m.power_w <= qos.max_power_w;
    state.flags[static_cast<std::size_t>(i)] = available ? 1 : -1;
  }
  return state;
}

int ActionIndex::link_count() const {
  const unsigned mask = bitmask();
  int count = 0;
  for (int k = 0; k < kLinkCount; ++k) count += (mask >> k) & 1u;
  return count;
}

std::array<ActionIndex, kActionCount> enumerate_actions() {
  std::array<ActionIndex, kActionCount> actions{};
  for (int i = 0; i < kActionCount; ++i) actions[static_cast<std::size_t>(i)] = ActionIndex{i};
  return actions;
}

double compute_reward(double capacity_bps, double latency_s, double power_w,
                      const RewardWeights& w) {
  return w.w_capacity * (capacity_bps / w.capacity_norm_bps) -
         w.w_latency * (latency_s / w.latency_norm_s) -
         w.w_power * (power_w / w.power_norm_w);
}

double normalized_snr(double snr_db) { return std::clamp(snr_db / 60.0, -1.0, 1.0); }

Aggregates aggregate_selected(const LinkMetricsTable& metrics, ActionIndex action) {
  Aggregates agg;
  agg.latency_s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kLinkCount; ++i) {
    if (!action.contains(kAllLinks[static_cast<std::size_t>(i)])) continue;
    const LinkMetrics& m = metrics[static_cast<std::size_t>(i)];
    agg.capacity_bps += m.capacity_bps;
    agg.latency_s = std::min(agg.latency_s, m.latency_s);
    agg.power_w += m.power_w;
  }
  return agg;
}

ActionIndex best_action_exhaustive(const LinkMetricsTable& metrics,
                                   const RewardWeights& weights) {
  ActionIndex best{0};
  double best_reward = -std::numeric_limits<double>::infinity();
  for (const ActionIndex action : enumerate_actions()) {
    const Aggregates agg = aggregate_selected(metrics, action);
    const double reward =
        compute_reward(agg.capacity_bps, agg.latency_s, agg.power_w, weights);
    if (reward > best_reward) {
      best_reward = reward;
      best = action;
    }
  }
  return best;
}

Env::Env(const EnvConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      mobility_rng_(derive_seed(seed, 1)),
      load_rng_(derive_seed(seed, 2)),
      los_rng_(derive_seed(seed, 3)) {
  if (cfg_.episode_length < 1) throw std::invalid_argument("env: episode_length must be >= 1");
  reset();
}

Observation Env::reset() {
  step_count_ = 0;
  prev_action_ = ActionIndex{0};  // start on the BS link
  const ChannelConfig chan{cfg_.packet_bits, zero_rate_latency_s()};

  if (cfg_.frozen && frozen_ready_) {
    world_ = frozen_world_;
    loads_ = frozen_loads_;
    metrics_ = evaluate_links_with_los(world_, cfg_.link_params, loads_, frozen_los_, chan);
    return make_observation(prev_action_);
  }

  world_ = make_initial_world(cfg_.mobility, mobility_rng_);
  for (double& load : loads_) load = initial_load(load_rng_);

  if (cfg_.frozen) {
    for (int i = 0; i < kLinkCount; ++i) {
      frozen_los_[static_cast<std::size_t>(i)] =
          los_rng_.bernoulli(los_probability(kAllLinks[static_cast<std::size_t>(i)], world_));
    }
    frozen_world_ = world_;
    frozen_loads_ = loads_;
    frozen_ready_ = true;
    metrics_ = evaluate_links_with_los(world_, cfg_.link_params, loads_, frozen_los_, chan);
  } else {
    metrics_ = evaluate_links(world_, cfg_.link_params, loads_, los_rng_, chan);
  }
  return make_observation(prev_action_);
}

StepOutcome Env::step(ActionIndex action) {
  if (action.index < 0 || action.index >= kActionCount) {
    throw std::out_of_range("env: action index out of range");
  }
  const ChannelConfig chan{cfg_.packet_bits, zero_rate_latency_s()};
  if (!cfg_.frozen) {
    world_ = advance_mobility(world_, cfg_.mobility, mobility_rng_);
    for (double& load : loads_) load = advance_load(load, load_rng_);
    metrics_ = evaluate_links(world_, cfg_.link_params, loads_, los_rng_, chan);
  }
  ++step_count_;

  const Aggregates agg = aggregate_selected(metrics_, action);
  StepOutcome outcome;
  outcome.capacity_bps = agg.capacity_bps;
  outcome.latency_s = agg.latency_s;
  outcome.power_w = agg.power_w;
  outcome.reward = compute_reward(agg.capacity_bps, agg.latency_s, agg.power_w, cfg_.reward);
  outcome.state_vector = availability_flags(metrics_, cfg_.qos);
  outcome.done = step_count_ >= cfg_.episode_length;
  prev_action_ = action;
  outcome.observation = make_observation(action);
  return outcome;
}

Observation Env::make_observation(ActionIndex selected) const {
  Observation obs(kObservationDim, 0.0);
  const LinkStateVector state = availability_flags(metrics_, cfg_.qos);
  for (int i = 0; i < kLinkCount; ++i) {
    if (!selected.contains(kAllLinks[static_cast<std::size_t>(i)])) continue;
    const LinkMetrics& m = metrics_[static_cast<std::size_t>(i)];
    double* f = obs.data() + static_cast<std::size_t>(i) * kFeaturesPerLink;
    f[0] = 1.0;
    f[1] = normalized_snr(m.snr_db);
    f[2] = m.load;
    f[3] = static_cast<double>(state.flags[static_cast<std::size_t>(i)]);
  }
  obs[static_cast<std::size_t>(kLinkCount * kFeaturesPerLink + selected.index)] = 1.0;
  return obs;
}

}  // namespace sagin
