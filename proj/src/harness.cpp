#include "sagin/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace sagin {

namespace {

using nlohmann::json;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int link_index(std::string_view name) {
  for (int i = 0; i < kLinkCount; ++i) {
    if (name == link_name(kAllLinks[static_cast<std::size_t>(i)])) return i;
  }
  return -1;
}

TrafficClass parse_traffic_class(const std::string& name) {
  if (name == "eMBB") return TrafficClass::Embb;
  if (name == "HRLLC") return TrafficClass::Hrllc;
  if (name == "mMTC") return TrafficClass::Mmtc;
  throw ConfigError("unknown traffic class: " + name);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  ExperimentConfig cfg;
  try {
    if (doc.contains("policies")) {
      cfg.policies.clear();
      for (const auto& name : doc["policies"]) {
        const auto kind = parse_policy(name.get<std::string>());
        if (!kind) throw ConfigError("unknown policy: " + name.get<std::string>());
        cfg.policies.push_back(*kind);
      }
    }
    cfg.episodes = doc.value("episodes", cfg.episodes);
    cfg.steps_per_episode = doc.value("steps_per_episode", cfg.steps_per_episode);
    if (doc.contains("seeds")) {
      cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    }
    if (doc.contains("reward_weights")) {
      const auto& w = doc["reward_weights"];
      cfg.reward_weights.w_capacity = w.value("capacity", cfg.reward_weights.w_capacity);
      cfg.reward_weights.w_latency = w.value("latency", cfg.reward_weights.w_latency);
      cfg.reward_weights.w_power = w.value("power", cfg.reward_weights.w_power);
      cfg.reward_weights.capacity_norm_bps =
          w.value("capacity_norm_bps", cfg.reward_weights.capacity_norm_bps);
      cfg.reward_weights.latency_norm_s =
          w.value("latency_norm_s", cfg.reward_weights.latency_norm_s);
      cfg.reward_weights.power_norm_w =
          w.value("power_norm_w", cfg.reward_weights.power_norm_w);
    }
    if (doc.contains("qos_class")) {
      cfg.qos_class = parse_traffic_class(doc["qos_class"].get<std::string>());
    }
    if (doc.contains("mobility")) {
      const auto& m = doc["mobility"];
      cfg.mobility.uav_speed_mps = m.value("uav_speed_mps", cfg.mobility.uav_speed_mps);
      cfg.mobility.leo_arc_step_deg =
          m.value("leo_arc_step_deg", cfg.mobility.leo_arc_step_deg);
      cfg.mobility.cell_radius_m = m.value("cell_radius_m", cfg.mobility.cell_radius_m);
      cfg.mobility.step_duration_s =
          m.value("step_duration_s", cfg.mobility.step_duration_s);
      cfg.mobility.uav_altitude_min_m =
          m.value("uav_altitude_min_m", cfg.mobility.uav_altitude_min_m);
      cfg.mobility.uav_altitude_max_m =
          m.value("uav_altitude_max_m", cfg.mobility.uav_altitude_max_m);
    }
    if (doc.contains("link_params")) {
      for (const auto& [name, body] : doc["link_params"].items()) {
        const int idx = link_index(name);
        if (idx < 0) throw ConfigError("unknown link name in link_params: " + name);
        LinkParams& p = cfg.link_params[static_cast<std::size_t>(idx)];
        p.bandwidth_hz = body.value("bandwidth_hz", p.bandwidth_hz);
        p.carrier_frequency_hz = body.value("carrier_frequency_hz", p.carrier_frequency_hz);
        p.tx_power_dbm = body.value("tx_power_dbm", p.tx_power_dbm);
        p.power_cost_w = body.value("power_cost_w", p.power_cost_w);
        p.antenna_gain_tx_dbi = body.value("antenna_gain_tx_dbi", p.antenna_gain_tx_dbi);
        p.antenna_gain_rx_dbi = body.value("antenna_gain_rx_dbi", p.antenna_gain_rx_dbi);
        p.noise_figure_db = body.value("noise_figure_db", p.noise_figure_db);
      }
    }
    cfg.packet_bits = doc.value("packet_bits", cfg.packet_bits);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.step_traces = doc.value("step_traces", cfg.step_traces);
    cfg.smooth_window = doc.value("smooth_window", cfg.smooth_window);
  } catch (const json::exception& e) {
    throw ConfigError("config field error: " + std::string(e.what()));
  }

  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (cfg.steps_per_episode < 1) throw ConfigError("steps_per_episode must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("need at least one seed");
  if (cfg.policies.empty()) throw ConfigError("need at least one policy");
  return cfg;
}

void apply_profile(ExperimentConfig& cfg, const std::string& profile) {
  if (profile == "desk") {
    cfg.episodes = 2000;
    cfg.seeds = {1, 2, 3};
  } else if (profile == "paper") {
    cfg.episodes = 10000;
    cfg.seeds = {1, 2, 3};
  } else {
    throw ConfigError("unknown profile: " + profile + " (expected desk or paper)");
  }
}

EnvConfig make_env_config(const ExperimentConfig& cfg) {
  EnvConfig env_cfg;
  env_cfg.mobility = cfg.mobility;
  env_cfg.link_params = cfg.link_params;
  env_cfg.qos = QosRequirement::preset(cfg.qos_class);
  env_cfg.reward = cfg.reward_weights;
  env_cfg.episode_length = cfg.steps_per_episode;
  env_cfg.packet_bits = cfg.packet_bits;
  return env_cfg;
}

std::uint64_t cell_seed(std::uint64_t replica_seed, PolicyKind kind) {
  return derive_seed(replica_seed, static_cast<std::uint64_t>(kind) + 101);
}

WindowMeans window_means(std::span<const EpisodeRecord> records, bool last,
                         double fraction) {
  const std::size_t n = records.size();
  const std::size_t window =
      std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n) * fraction));
  const std::size_t begin = last ? n - window : 0;
  const std::size_t end = last ? n : window;
  WindowMeans means;
  for (std::size_t i = begin; i < end; ++i) {
    means.episode_return += records[i].episode_return;
    means.capacity_bps += records[i].mean_capacity_bps;
    means.latency_s += records[i].mean_latency_s;
    means.power_w += records[i].mean_power_w;
    means.switch_rate += records[i].switch_rate;
  }
  const double count = static_cast<double>(end - begin);
  means.episode_return /= count;
  means.capacity_bps /= count;
  means.latency_s /= count;
  means.power_w /= count;
  means.switch_rate /= count;
  return means;
}

std::vector<EpisodeRecord> run_policy_episodes(Policy& policy, Env& env, int episodes,
                                               int steps_per_episode) {
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(episodes));
  for (int episode = 0; episode < episodes; ++episode) {
    Observation obs = env.reset();
    policy.begin_episode();
    EpisodeAccumulator acc;
    for (int step = 0; step < steps_per_episode; ++step) {
      const ActionIndex action = policy.act(obs, step);
      StepOutcome outcome = env.step(action);
      acc.add(action, outcome);
      obs = std::move(outcome.observation);
      if (outcome.done) break;
    }
    records.push_back(acc.finalize(episode));
  }
  return records;
}

namespace {

std::unique_ptr<Policy> make_simple_policy(PolicyKind kind, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::Random:
      return std::make_unique<RandomPolicy>(derive_seed(seed, 23));
    case PolicyKind::RoundRobin: return std::make_unique<RoundRobinPolicy>();
    case PolicyKind::GreedySnr: return std::make_unique<GreedySnrPolicy>();
    case PolicyKind::BsOnly: return std::make_unique<BsOnlyPolicy>();
    default: return nullptr;
  }
}

}  // namespace

CellResult run_cell(PolicyKind kind, const ExperimentConfig& cfg,
                    std::uint64_t replica_seed) {
  const std::uint64_t seed = cell_seed(replica_seed, kind);
  const EnvConfig env_cfg = make_env_config(cfg);
  const EnvFactory factory = [env_cfg](std::uint64_t s) { return Env(env_cfg, s); };

  CellResult result;
  result.policy = kind;
  result.seed = replica_seed;

  switch (kind) {
    case PolicyKind::Random:
    case PolicyKind::RoundRobin:
    case PolicyKind::GreedySnr:
    case PolicyKind::BsOnly: {
      std::unique_ptr<Policy> policy = make_simple_policy(kind, seed);
      Env env = factory(derive_seed(seed, 21));
      result.records =
          run_policy_episodes(*policy, env, cfg.episodes, cfg.steps_per_episode);
      result.trained = std::move(policy);
      break;
    }
    case PolicyKind::Dqn: {
      PolicyTrainResult trained =
          dqn_train(factory, DqnConfig{}, cfg.episodes, cfg.steps_per_episode, seed);
      auto* net_policy = static_cast<GreedyNetPolicy*>(trained.policy.get());
      result.checkpoint_nets.push_back(net_policy->net());
      result.records = std::move(trained.records);
      result.trained = std::move(trained.policy);
      break;
    }
    case PolicyKind::Ppo: {
      PolicyTrainResult trained =
          ppo_train(factory, PpoConfig{}, cfg.episodes, cfg.steps_per_episode, seed);
      auto* net_policy = static_cast<GreedyNetPolicy*>(trained.policy.get());
      result.checkpoint_nets.push_back(net_policy->net());
      result.records = std::move(trained.records);
      result.trained = std::move(trained.policy);
      break;
    }
    case PolicyKind::Proposed: {
      TrainResult trained = train_actor_critic(factory, AgentConfig{}, cfg.episodes,
                                               cfg.steps_per_episode, seed);
      result.checkpoint_nets.push_back(trained.agent.actor());
      result.checkpoint_nets.push_back(trained.agent.critic());
      result.checkpoint_nets.push_back(trained.agent.target_critic());
      result.records = std::move(trained.records);
      result.trained = std::make_unique<GreedyNetPolicy>(trained.agent.actor());
      break;
    }
  }
  return result;
}

void write_trace_csv(const std::string& path, std::span<const EpisodeRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace file: " + path);
  out << kTraceHeader << '\n';
  for (const EpisodeRecord& r : records) {
    out << r.episode << ',' << format_value(r.episode_return) << ','
        << format_value(r.mean_capacity_bps) << ',' << format_value(r.mean_latency_s)
        << ',' << format_value(r.mean_power_w) << ',' << format_value(r.switch_rate)
        << '\n';
  }
  if (!out) throw IoError("short write on trace file: " + path);
}

std::vector<EpisodeRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read trace file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError("bad trace header in " + path);
  }
  std::vector<EpisodeRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpisodeRecord r;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    if (!(row >> r.episode >> r.episode_return >> r.mean_capacity_bps >>
          r.mean_latency_s >> r.mean_power_w >> r.switch_rate)) {
      throw IoError("bad trace row in " + path);
    }
    records.push_back(r);
  }
  return records;
}

namespace {

// One CSV row per step, capped at 20 episodes. Non-learning cells are
// replayed with their original seeds so the rows reproduce the recorded
// trajectory exactly; learned cells roll their trained greedy policy on a
// fresh stream.
void write_step_trace_csv(const std::string& path, const ExperimentConfig& cfg,
                          const CellResult& cell) {
  const std::uint64_t seed = cell_seed(cell.seed, cell.policy);
  std::unique_ptr<Policy> replay = make_simple_policy(cell.policy, seed);
  const std::uint64_t env_seed =
      replay ? derive_seed(seed, 21) : derive_seed(derive_seed(seed, 77), 21);
  Policy* policy = replay ? replay.get() : cell.trained.get();
  Env env(make_env_config(cfg), env_seed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write step trace: " + path);
  out << "episode,step,action_mask,capacity_bps,latency_s,power_w,reward,flags\n";
  for (int episode = 0; episode < std::min(cfg.episodes, 20); ++episode) {
    Observation obs = env.reset();
    policy->begin_episode();
    for (int step = 0; step < cfg.steps_per_episode; ++step) {
      const ActionIndex action = policy->act(obs, step);
      StepOutcome outcome = env.step(action);
      out << episode << ',' << step << ',' << action.bitmask() << ','
          << format_value(outcome.capacity_bps) << ',' << format_value(outcome.latency_s)
          << ',' << format_value(outcome.power_w) << ',' << format_value(outcome.reward)
          << ',';
      for (int k = 0; k < kLinkCount; ++k) {
        out << (outcome.state_vector.flags[static_cast<std::size_t>(k)] > 0 ? '+' : '-');
      }
      out << '\n';
      obs = std::move(outcome.observation);
      if (outcome.done) break;
    }
  }
}

struct PolicyAggregate {
  WindowMeans mean;
  WindowMeans stddev;
};

PolicyAggregate aggregate_policy(const ExperimentResult& result, PolicyKind kind) {
  std::vector<WindowMeans> per_seed;
  for (const CellResult& cell : result.cells) {
    if (cell.policy == kind) per_seed.push_back(window_means(cell.records, true, 0.1));
  }
  PolicyAggregate agg;
  const double n = static_cast<double>(per_seed.size());
  for (const WindowMeans& w : per_seed) {
    agg.mean.episode_return += w.episode_return / n;
    agg.mean.capacity_bps += w.capacity_bps / n;
    agg.mean.latency_s += w.latency_s / n;
    agg.mean.power_w += w.power_w / n;
    agg.mean.switch_rate += w.switch_rate / n;
  }
  if (per_seed.size() > 1) {
    for (const WindowMeans& w : per_seed) {
      const auto sq = [](double d) { return d * d; };
      agg.stddev.episode_return += sq(w.episode_return - agg.mean.episode_return);
      agg.stddev.capacity_bps += sq(w.capacity_bps - agg.mean.capacity_bps);
      agg.stddev.latency_s += sq(w.latency_s - agg.mean.latency_s);
      agg.stddev.power_w += sq(w.power_w - agg.mean.power_w);
      agg.stddev.switch_rate += sq(w.switch_rate - agg.mean.switch_rate);
    }
    const double denom = n - 1.0;
    agg.stddev.episode_return = std::sqrt(agg.stddev.episode_return / denom);
    agg.stddev.capacity_bps = std::sqrt(agg.stddev.capacity_bps / denom);
    agg.stddev.latency_s = std::sqrt(agg.stddev.latency_s / denom);
    agg.stddev.power_w = std::sqrt(agg.stddev.power_w / denom);
    agg.stddev.switch_rate = std::sqrt(agg.stddev.switch_rate / denom);
  }
  return agg;
}

void write_summary_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write summary file: " + path);
  out << "policy,return_mean,return_std,capacity_bps_mean,capacity_bps_std,"
         "latency_s_mean,latency_s_std,power_w_mean,power_w_std,"
         "switch_rate_mean,switch_rate_std\n";
  for (PolicyKind kind : result.config.policies) {
    const PolicyAggregate agg = aggregate_policy(result, kind);
    out << policy_name(kind) << ',' << format_value(agg.mean.episode_return) << ','
        << format_value(agg.stddev.episode_return) << ','
        << format_value(agg.mean.capacity_bps) << ','
        << format_value(agg.stddev.capacity_bps) << ','
        << format_value(agg.mean.latency_s) << ',' << format_value(agg.stddev.latency_s)
        << ',' << format_value(agg.mean.power_w) << ','
        << format_value(agg.stddev.power_w) << ','
        << format_value(agg.mean.switch_rate) << ','
        << format_value(agg.stddev.switch_rate) << '\n';
  }
  if (!out) throw IoError("short write on summary file: " + path);
}

}  // namespace

const CellResult& ExperimentResult::cell(PolicyKind kind, std::uint64_t seed) const {
  for (const CellResult& c : cells) {
    if (c.policy == kind && c.seed == seed) return c;
  }
  throw std::out_of_range("no such experiment cell");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("need at least one seed");

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir)) {
    throw IoError("cannot create output directory: " + cfg.out_dir);
  }

  struct CellSpec {
    PolicyKind kind;
    std::uint64_t seed;
  };
  std::vector<CellSpec> specs;
  for (PolicyKind kind : cfg.policies) {
    for (std::uint64_t seed : cfg.seeds) specs.push_back({kind, seed});
  }

  ExperimentResult result;
  result.config = cfg;
  result.cells.resize(specs.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(hw);
  if (threads <= 1 || specs.size() == 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      result.cells[i] = run_cell(specs[i].kind, cfg, specs[i].seed);
    }
  } else {
    std::counting_semaphore<> slots(threads);
    std::vector<std::future<void>> futures;
    futures.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      slots.acquire();
      futures.push_back(std::async(std::launch::async, [&, i] {
        result.cells[i] = run_cell(specs[i].kind, cfg, specs[i].seed);
        slots.release();
      }));
    }
    for (auto& f : futures) f.get();
  }

  for (const CellResult& cell : result.cells) {
    const std::string base = cfg.out_dir + "/" + policy_name(cell.policy) + "_seed" +
                             std::to_string(cell.seed);
    write_trace_csv(base + ".csv", cell.records);
    if (cfg.smooth_window > 0) {
      std::vector<double> returns;
      returns.reserve(cell.records.size());
      for (const EpisodeRecord& r : cell.records) returns.push_back(r.episode_return);
      const std::vector<double> smooth = moving_average(returns, cfg.smooth_window);
      std::ofstream out(base + "_smoothed.csv", std::ios::binary);
      if (!out) throw IoError("cannot write smoothed file");
      out << "episode,return_smoothed\n";
      for (std::size_t i = 0; i < smooth.size(); ++i) {
        out << i << ',' << format_value(smooth[i]) << '\n';
      }
    }
  }
  if (cfg.step_traces) {
    for (const CellResult& cell : result.cells) {
      const std::string path = cfg.out_dir + "/" + policy_name(cell.policy) + "_seed" +
                               std::to_string(cell.seed) + "_steps.csv";
      write_step_trace_csv(path, cfg, cell);
    }
  }
  write_summary_csv(cfg.out_dir + "/summary.csv", result);
  return result;
}

namespace {

bool has_policy(const ExperimentConfig& cfg, PolicyKind kind) {
  return std::find(cfg.policies.begin(), cfg.policies.end(), kind) != cfg.policies.end();
}

}  // namespace

CompareReport compare(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  if (cfg.policies.size() < 2) throw ConfigError("compare needs at least two policies");

  std::ostringstream text;
  struct MetricView {
    const char* name;
    double WindowMeans::* field;
    bool lower_is_better;
  };
  const MetricView metrics[] = {
      {"return", &WindowMeans::episode_return, false},
      {"capacity_bps", &WindowMeans::capacity_bps, false},
      {"latency_s", &WindowMeans::latency_s, true},
      {"power_w", &WindowMeans::power_w, true},
      {"switch_rate", &WindowMeans::switch_rate, true},
  };

  std::vector<std::pair<PolicyKind, PolicyAggregate>> aggs;
  for (PolicyKind kind : cfg.policies) aggs.emplace_back(kind, aggregate_policy(result, kind));

  for (const MetricView& metric : metrics) {
    auto order = aggs;
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      const double va = a.second.mean.*metric.field;
      const double vb = b.second.mean.*metric.field;
      return metric.lower_is_better ? va < vb : va > vb;
    });
    text << "metric " << metric.name << " (last-10% means";
    text << (metric.lower_is_better ? ", lower is better)\n" : ", higher is better)\n");
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double v = order[i].second.mean.*metric.field;
      text << "  " << (i + 1) << ". " << policy_name(order[i].first) << " = "
           << format_value(v);
      if (i + 1 < order.size()) {
        const double next = order[i + 1].second.mean.*metric.field;
        text << " (gap to next " << format_value(v - next) << ")";
      }
      text << '\n';
    }
  }

  // Per-seed window means, keyed by policy.
  const auto seed_means = [&](PolicyKind kind) {
    std::vector<WindowMeans> out;
    for (std::uint64_t seed : cfg.seeds) {
      out.push_back(window_means(result.cell(kind, seed).records, true, 0.1));
    }
    return out;
  };
  // "2 of 3 seeds" generalized: at least two thirds of the replicas.
  const auto majority = [](int got, int total) { return 3 * got >= 2 * total; };

  CompareReport report;
  OrderingChecks& checks = report.checks;
  const int n_seeds = static_cast<int>(cfg.seeds.size());

  if (has_policy(cfg, PolicyKind::Proposed) && has_policy(cfg, PolicyKind::Dqn) &&
      has_policy(cfg, PolicyKind::Ppo)) {
    const auto prop = seed_means(PolicyKind::Proposed);
    const auto dqn = seed_means(PolicyKind::Dqn);
    const auto ppo = seed_means(PolicyKind::Ppo);
    int wins = 0;
    for (int s = 0; s < n_seeds; ++s) {
      if (prop[static_cast<std::size_t>(s)].episode_return >
              dqn[static_cast<std::size_t>(s)].episode_return &&
          prop[static_cast<std::size_t>(s)].episode_return >
              ppo[static_cast<std::size_t>(s)].episode_return) {
        ++wins;
      }
    }
    checks.convergence_ok = majority(wins, n_seeds);
    text << "check convergence: proposed return beats dqn+ppo on " << wins << "/"
         << n_seeds << " seeds -> " << (checks.convergence_ok ? "ok" : "VIOLATION")
         << '\n';
  }

  if (has_policy(cfg, PolicyKind::Proposed)) {
    double first = 0.0, last = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      const auto& records = result.cell(PolicyKind::Proposed, seed).records;
      first += window_means(records, false, 0.1).switch_rate;
      last += window_means(records, true, 0.1).switch_rate;
    }
    first /= static_cast<double>(n_seeds);
    last /= static_cast<double>(n_seeds);
    checks.switching_ok = last < 0.25 * first;
    text << "check switching: proposed last-10% rate " << format_value(last)
         << " vs first-10% " << format_value(first) << " -> "
         << (checks.switching_ok ? "ok" : "VIOLATION") << '\n';
  }

  if (has_policy(cfg, PolicyKind::BsOnly)) {
    const auto bs = seed_means(PolicyKind::BsOnly);
    bool bs_lowest_everywhere = true;
    for (PolicyKind other : cfg.policies) {
      if (other == PolicyKind::BsOnly) continue;
      const auto means = seed_means(other);
      for (int s = 0; s < n_seeds; ++s) {
        if (means[static_cast<std::size_t>(s)].capacity_bps <=
            bs[static_cast<std::size_t>(s)].capacity_bps) {
          bs_lowest_everywhere = false;
        }
      }
    }
    int proposed_highest = 0;
    if (has_policy(cfg, PolicyKind::Proposed)) {
      const auto prop = seed_means(PolicyKind::Proposed);
      for (int s = 0; s < n_seeds; ++s) {
        bool highest = true;
        for (PolicyKind other : cfg.policies) {
          if (other == PolicyKind::Proposed) continue;
          const auto means = seed_means(other);
          if (means[static_cast<std::size_t>(s)].capacity_bps >=
              prop[static_cast<std::size_t>(s)].capacity_bps) {
            highest = false;
          }
        }
        if (highest) ++proposed_highest;
      }
    }
    checks.capacity_ok = bs_lowest_everywhere &&
                         (!has_policy(cfg, PolicyKind::Proposed) ||
                          majority(proposed_highest, n_seeds));
    text << "check capacity: bs_only lowest everywhere="
         << (bs_lowest_everywhere ? "yes" : "NO") << ", proposed highest on "
         << proposed_highest << "/" << n_seeds << " seeds -> "
         << (checks.capacity_ok ? "ok" : "VIOLATION") << '\n';
  }

  if (has_policy(cfg, PolicyKind::Proposed) && has_policy(cfg, PolicyKind::Random) &&
      has_policy(cfg, PolicyKind::RoundRobin)) {
    const auto prop = seed_means(PolicyKind::Proposed);
    const auto rnd = seed_means(PolicyKind::Random);
    const auto rr = seed_means(PolicyKind::RoundRobin);
    bool under_rand_rr = true;
    for (int s = 0; s < n_seeds; ++s) {
      if (!(prop[static_cast<std::size_t>(s)].latency_s <
                rnd[static_cast<std::size_t>(s)].latency_s &&
            prop[static_cast<std::size_t>(s)].latency_s <
                rr[static_cast<std::size_t>(s)].latency_s)) {
        under_rand_rr = false;
      }
    }
    int lowest = 0;
    for (int s = 0; s < n_seeds; ++s) {
      bool is_lowest = true;
      for (PolicyKind other : cfg.policies) {
        if (other == PolicyKind::Proposed) continue;
        const auto means = seed_means(other);
        if (means[static_cast<std::size_t>(s)].latency_s <=
            prop[static_cast<std::size_t>(s)].latency_s) {
          is_lowest = false;
        }
      }
      if (is_lowest) ++lowest;
    }
    checks.latency_ok = under_rand_rr && majority(lowest, n_seeds);
    text << "check latency: proposed under random/round_robin everywhere="
         << (under_rand_rr ? "yes" : "NO") << ", lowest on " << lowest << "/" << n_seeds
         << " seeds -> " << (checks.latency_ok ? "ok" : "VIOLATION") << '\n';
  }

  if (has_policy(cfg, PolicyKind::BsOnly) && has_policy(cfg, PolicyKind::Proposed)) {
    const auto bs = seed_means(PolicyKind::BsOnly);
    const auto prop = seed_means(PolicyKind::Proposed);
    const PolicyAggregate bs_agg = aggregate_policy(result, PolicyKind::BsOnly);
    bool above = true;
    for (int s = 0; s < n_seeds; ++s) {
      if (!(prop[static_cast<std::size_t>(s)].power_w >
            bs[static_cast<std::size_t>(s)].power_w)) {
        above = false;
      }
    }
    checks.power_ok = bs_agg.mean.power_w == 2.0 && above;
    text << "check power: bs_only mean " << format_value(bs_agg.mean.power_w)
         << " W (exact 2), proposed above it everywhere=" << (above ? "yes" : "NO")
         << " -> " << (checks.power_ok ? "ok" : "VIOLATION") << '\n';
  }

  report.text = text.str();
  return report;
}

void save_checkpoint(const std::string& path, PolicyKind kind,
                     const std::string& metadata_json, std::span<const Mlp> nets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << "saginckpt 1\n" << policy_name(kind) << '\n' << metadata_json << '\n'
      << nets.size() << '\n';
  for (const Mlp& net : nets) save_mlp(net, out);
  if (!out) throw IoError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "saginckpt" || version != 1) throw IoError("bad checkpoint header");
  std::string kind_name;
  in >> kind_name;
  const auto kind = parse_policy(kind_name);
  if (!kind) throw IoError("bad policy kind in checkpoint: " + kind_name);
  in >> std::ws;
  Checkpoint ckpt;
  ckpt.kind = *kind;
  std::getline(in, ckpt.metadata_json);
  std::size_t count = 0;
  in >> count;
  if (count == 0 || count > 8) throw IoError("bad net count in checkpoint");
  for (std::size_t i = 0; i < count; ++i) ckpt.nets.push_back(load_mlp(in));
  return ckpt;
}

}  // namespace sagin
