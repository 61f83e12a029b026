#include "sagin/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace sagin {

double switching_rate(std::span<const ActionIndex> actions) {
  if (actions.size() < 2) {
    throw std::invalid_argument("switching_rate: need at least two actions");
  }
  int switches = 0;
  for (std::size_t i = 1; i < actions.size(); ++i) {
    if (actions[i].index != actions[i - 1].index) ++switches;
  }
  return static_cast<double>(switches) / static_cast<double>(actions.size() - 1);
}

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double running = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    running += series[i];
    if (i >= static_cast<std::size_t>(window)) running -= series[i - window];
    const std::size_t span_len = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = running / static_cast<double>(span_len);
  }
  return out;
}

void EpisodeAccumulator::add(ActionIndex action, const StepOutcome& outcome) {
  actions_.push_back(action);
  return_sum_ += outcome.reward;
  capacity_sum_ += outcome.capacity_bps;
  latency_sum_ += outcome.latency_s;
  power_sum_ += outcome.power_w;
}

EpisodeRecord EpisodeAccumulator::finalize(int episode_index) const {
  EpisodeRecord record;
  record.episode = episode_index;
  const double n = static_cast<double>(actions_.size());
  if (n > 0.0) {
    record.episode_return = return_sum_;
    record.mean_capacity_bps = capacity_sum_ / n;
    record.mean_latency_s = latency_sum_ / n;
    record.mean_power_w = power_sum_ / n;
  }
  record.switch_rate = actions_.size() >= 2 ? switching_rate(actions_) : 0.0;
  return record;
}

}  // namespace sagin
