#pragma once

#include <span>
#include <vector>

#include "sagin/env.hpp"

namespace sagin {

// Per-episode aggregates logged by every training/evaluation loop.
struct EpisodeRecord {
  int episode = 0;
  double episode_return = 0.0;
  double mean_capacity_bps = 0.0;
  double mean_latency_s = 0.0;
  double mean_power_w = 0.0;
  double switch_rate = 0.0;
};

// Fraction of consecutive action pairs that differ. Needs at least two
// actions (throws std::invalid_argument otherwise).
double switching_rate(std::span<const ActionIndex> actions);

// Trailing mean over up to `window` previous points; output length matches
// the input. window must be >= 1.
std::vector<double> moving_average(std::span<const double> series, int window);

// Collects one episode's step outcomes into an EpisodeRecord.
class EpisodeAccumulator {
 public:
  void add(ActionIndex action, const StepOutcome& outcome);
  EpisodeRecord finalize(int episode_index) const;
  int steps() const { return static_cast<int>(actions_.size()); }
  const std::vector<ActionIndex>& actions() const { return actions_; }

 private:
  std::vector<ActionIndex> actions_;
  double return_sum_ = 0.0;
  double capacity_sum_ = 0.0;
  double latency_sum_ = 0.0;
  double power_sum_ = 0.0;
};

}  // namespace sagin
