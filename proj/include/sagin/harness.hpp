#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sagin/baselines.hpp"
#include "sagin/env.hpp"
#include "sagin/metrics.hpp"

namespace sagin {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<PolicyKind> policies{kAllPolicies.begin(), kAllPolicies.end()};
  int episodes = 2000;  // desk profile; the full-scale run uses 10000
  int steps_per_episode = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  RewardWeights reward_weights{};
  TrafficClass qos_class = TrafficClass::Embb;
  MobilityConfig mobility{};
  LinkParamsTable link_params = default_link_params();
  double packet_bits = 12000.0;
  std::string out_dir = "results";
  int threads = 0;          // 0 = hardware concurrency
  bool step_traces = false;  // also write per-step rows per cell
  int smooth_window = 0;     // >0 emits smoothed return curves per cell
};

ExperimentConfig load_experiment_config(const std::string& path);
void apply_profile(ExperimentConfig& cfg, const std::string& profile);  // desk|paper

EnvConfig make_env_config(const ExperimentConfig& cfg);

// Deterministic fan-out: the stream of a (policy, replica) cell depends only
// on the replica seed and the policy identity, so adding or removing policies
// never shifts anyone else's randomness.
std::uint64_t cell_seed(std::uint64_t replica_seed, PolicyKind kind);

// Last-`fraction` window mean of one metric column.
struct WindowMeans {
  double episode_return = 0.0;
  double capacity_bps = 0.0;
  double latency_s = 0.0;
  double power_w = 0.0;
  double switch_rate = 0.0;
};
WindowMeans window_means(std::span<const EpisodeRecord> records, bool last, double fraction);

struct CellResult {
  PolicyKind policy{};
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;
  std::unique_ptr<Policy> trained;  // greedy policy for evaluation reuse
  std::vector<Mlp> checkpoint_nets;  // empty for the non-learning baselines
};

// Train or roll out one (policy, seed) cell. Does not touch the filesystem.
CellResult run_cell(PolicyKind kind, const ExperimentConfig& cfg,
                    std::uint64_t replica_seed);

// Roll a fixed policy through `episodes` episodes of a fresh environment.
std::vector<EpisodeRecord> run_policy_episodes(Policy& policy, Env& env, int episodes,
                                               int steps_per_episode);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // config order: policy-major, then seeds
  const CellResult& cell(PolicyKind kind, std::uint64_t seed) const;
};

// Runs every requested (policy, seed) cell — in parallel when allowed — and
// writes one trace CSV per cell plus summary.csv into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Trace CSV I/O. The header is part of the file contract.
inline constexpr const char* kTraceHeader =
    "episode,return,capacity_bps,latency_s,power_w,switch_rate";
void write_trace_csv(const std::string& path, std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_trace_csv(const std::string& path);

struct OrderingChecks {
  bool convergence_ok = true;  // proposed return beats DQN and PPO (2 of 3 seeds)
  bool switching_ok = true;    // proposed switch rate collapses below 25% of its start
  bool capacity_ok = true;     // BS-only lowest everywhere; proposed highest (2 of 3)
  bool latency_ok = true;      // proposed under random/round-robin; lowest (2 of 3)
  bool power_ok = true;        // BS-only exactly 2 W; proposed above it everywhere
  bool all_ok() const {
    return convergence_ok && switching_ok && capacity_ok && latency_ok && power_ok;
  }
};

struct CompareReport {
  OrderingChecks checks;
  std::string text;  // rankings, pairwise differences, check verdicts
};

// Ranks policies per metric and verifies the qualitative orderings the
// reference figures report. Checks whose policies are missing are skipped.
CompareReport compare(const ExperimentResult& result);

// Checkpoints: versioned header, policy kind, one JSON metadata line, then
// the nets in the Mlp text format.
void save_checkpoint(const std::string& path, PolicyKind kind,
                     const std::string& metadata_json, std::span<const Mlp> nets);

struct Checkpoint {
  PolicyKind kind{};
  std::string metadata_json;
  std::vector<Mlp> nets;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sagin
