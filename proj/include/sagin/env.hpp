#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sagin/channel.hpp"
#include "sagin/geometry.hpp"
#include "sagin/rng.hpp"

namespace sagin {

enum class TrafficClass { Embb, Hrllc, Mmtc };

const char* traffic_class_name(TrafficClass c);

struct QosRequirement {
  double min_capacity_bps = 100e6;
  double max_latency_s = 10e-3;
  double max_power_w = 14.0;
  TrafficClass traffic_class = TrafficClass::Embb;

  static QosRequirement preset(TrafficClass c);
};

// Per-link availability flags, +1 (AV) or -1 (NAV), ordered by LinkKind.
struct LinkStateVector {
  std::array<int, kLinkCount> flags{};
};

// A link is available when it clears an even per-link share of the capacity
// requirement and the latency/power ceilings.
LinkStateVector availability_flags(const LinkMetricsTable& metrics,
                                   const QosRequirement& qos);

// One of the 15 non-empty subsets of {BS, UAV, HAP, LEO}. index = bitmask - 1,
// bit k selecting kAllLinks[k].
struct ActionIndex {
  int index = 0;

  unsigned bitmask() const { return static_cast<unsigned>(index) + 1u; }
  bool contains(LinkKind kind) const {
    return (bitmask() >> static_cast<int>(kind)) & 1u;
  }
  int link_count() const;
  bool operator==(const ActionIndex&) const = default;
};

inline constexpr int kActionCount = 15;

std::array<ActionIndex, kActionCount> enumerate_actions();

struct RewardWeights {
  double w_capacity = 1.0;
  double w_latency = 0.2;
  double w_power = 0.05;
  double capacity_norm_bps = 1e9;
  double latency_norm_s = 10e-3;
  double power_norm_w = 14.0;
};

double compute_reward(double capacity_bps, double latency_s, double power_w,
                      const RewardWeights& weights);

// Observation layout: 4 features per link (selected-last-step flag,
// normalized SNR, load, AV/NAV), then the previous action one-hot. Features
// of links the agent did not select last step are zeroed.
inline constexpr int kFeaturesPerLink = 4;
inline constexpr int kObservationDim = kLinkCount * kFeaturesPerLink + kActionCount;

using Observation = std::vector<double>;

double normalized_snr(double snr_db);

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  double capacity_bps = 0.0;
  double latency_s = 0.0;
  double power_w = 0.0;
  LinkStateVector state_vector;  // ground truth, not visible to the agent
  bool done = false;
};

// Aggregates over a selected subset: capacities add up (traffic aggregation),
// latency is the fastest selected path (packet duplication), power costs add.
struct Aggregates {
  double capacity_bps = 0.0;
  double latency_s = 0.0;
  double power_w = 0.0;
};

Aggregates aggregate_selected(const LinkMetricsTable& metrics, ActionIndex action);

// Exhaustive best-reward action for a fixed metric table. This is the search
// oracle the learning results are checked against.
ActionIndex best_action_exhaustive(const LinkMetricsTable& metrics,
                                   const RewardWeights& weights);

struct EnvConfig {
  MobilityConfig mobility{};
  LinkParamsTable link_params = default_link_params();
  QosRequirement qos{};
  RewardWeights reward{};
  int episode_length = 50;
  double packet_bits = 12000.0;
  // Bandit variant: world, loads and LOS states are drawn once and pinned;
  // every reset returns to the identical snapshot.
  bool frozen = false;
};

// The link-selection POMDP. Value-copyable; a copy continues the exact same
// trajectory, which the tests use to replay one step under different actions.
class Env {
 public:
  Env(const EnvConfig& cfg, std::uint64_t seed);

  Observation reset();
  StepOutcome step(ActionIndex action);

  const EnvConfig& config() const { return cfg_; }
  const WorldState& world() const { return world_; }
  const LinkMetricsTable& current_metrics() const { return metrics_; }
  const LoadVector& loads() const { return loads_; }
  int steps_taken() const { return step_count_; }

 private:
  Observation make_observation(ActionIndex selected) const;
  double zero_rate_latency_s() const { return cfg_.qos.max_latency_s * 10.0; }

  EnvConfig cfg_;
  Rng mobility_rng_;
  Rng load_rng_;
  Rng los_rng_;
  WorldState world_;
  LoadVector loads_{};
  LinkMetricsTable metrics_{};
  ActionIndex prev_action_{0};
  int step_count_ = 0;
  bool frozen_ready_ = false;
  WorldState frozen_world_;
  LoadVector frozen_loads_{};
  LosVector frozen_los_{};
};

}  // namespace sagin
