#include <cstdlib>
#include <sys/wait.h>
#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <doctest.h>

#include "sagin/harness.hpp"

using namespace sagin;

namespace {

std::string fresh_dir(const char* tag) {
  const std::string path =
      (std::filesystem::temp_directory_path() / (std::string("saginmc_test_") + tag))
          .string();
  std::filesystem::remove_all(path);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.policies = {PolicyKind::Random, PolicyKind::GreedySnr};
  cfg.episodes = 12;
  cfg.steps_per_episode = 50;
  cfg.seeds = {1, 2, 3};
  cfg.out_dir = out_dir;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("switching rate") {
  const auto seq = [](std::initializer_list<int> xs) {
    std::vector<ActionIndex> out;
    for (int x : xs) out.push_back(ActionIndex{x});
    return out;
  };
  CHECK(switching_rate(seq({3, 3, 3, 3})) == 0.0);
  CHECK(switching_rate(seq({1, 2, 1, 2, 1})) == 1.0);
  CHECK(switching_rate(seq({0, 0, 1, 1, 2})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(switching_rate(seq({4})), std::invalid_argument);
}

TEST_CASE("moving average") {
  const std::vector<double> series{1.0, 2.0, 3.0, 4.0};
  CHECK(moving_average(series, 1) == series);
  const std::vector<double> smoothed = moving_average(series, 2);
  CHECK(smoothed[0] == doctest::Approx(1.0));
  CHECK(smoothed[1] == doctest::Approx(1.5));
  CHECK(smoothed[2] == doctest::Approx(2.5));
  CHECK(smoothed[3] == doctest::Approx(3.5));
  const std::vector<double> constant(7, 3.3);
  for (double v : moving_average(constant, 4)) CHECK(v == doctest::Approx(3.3));
  CHECK_THROWS_AS(moving_average(series, 0), std::invalid_argument);
}

TEST_CASE("run_experiment writes one trace per cell plus one summary") {
  const std::string dir = fresh_dir("files");
  const ExperimentConfig cfg = tiny_config(dir);
  run_experiment(cfg);

  std::set<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    names.insert(entry.path().filename().string());
  }
  CHECK(names.size() == 7);  // 2 policies x 3 seeds + summary
  CHECK(names.count("summary.csv") == 1);
  for (const char* policy : {"random", "greedy_snr"}) {
    for (int seed : {1, 2, 3}) {
      CHECK(names.count(std::string(policy) + "_seed" + std::to_string(seed) + ".csv") == 1);
    }
  }
}

TEST_CASE("reruns produce byte-identical outputs") {
  const std::string dir_a = fresh_dir("rerun_a");
  const std::string dir_b = fresh_dir("rerun_b");
  ExperimentConfig cfg = tiny_config(dir_a);
  run_experiment(cfg);
  cfg.out_dir = dir_b;
  run_experiment(cfg);
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const std::string name = entry.path().filename().string();
    CHECK(slurp(dir_a + "/" + name) == slurp(dir_b + "/" + name));
  }
}

TEST_CASE("trace files parse back complete and consistent") {
  const std::string dir = fresh_dir("parse");
  ExperimentConfig cfg = tiny_config(dir);
  const ExperimentResult result = run_experiment(cfg);

  for (const CellResult& cell : result.cells) {
    const std::string path = dir + "/" + std::string(policy_name(cell.policy)) +
                             "_seed" + std::to_string(cell.seed) + ".csv";
    const std::vector<EpisodeRecord> parsed = read_trace_csv(path);
    REQUIRE(parsed.size() == static_cast<std::size_t>(cfg.episodes));
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      CHECK(parsed[i].episode == static_cast<int>(i));
      CHECK(std::isfinite(parsed[i].episode_return));
      CHECK(parsed[i].switch_rate >= 0.0);
      CHECK(parsed[i].switch_rate <= 1.0);
    }
  }
}

TEST_CASE("summary equals recomputation from the trace files") {
  const std::string dir = fresh_dir("summary");
  ExperimentConfig cfg = tiny_config(dir);
  run_experiment(cfg);

  // independent recomputation: parse traces, average the last-10% window
  std::ifstream summary(dir + "/summary.csv");
  REQUIRE(summary);
  std::string header, line;
  std::getline(summary, header);
  while (std::getline(summary, line)) {
    const std::string name = line.substr(0, line.find(','));
    double mean_return = 0.0;
    for (int seed : {1, 2, 3}) {
      const auto records =
          read_trace_csv(dir + "/" + name + "_seed" + std::to_string(seed) + ".csv");
      const std::size_t window = records.size() / 10 ? records.size() / 10 : 1;
      double sum = 0.0;
      for (std::size_t i = records.size() - window; i < records.size(); ++i) {
        sum += records[i].episode_return;
      }
      mean_return += sum / static_cast<double>(window);
    }
    mean_return /= 3.0;
    const double reported = std::stod(line.substr(line.find(',') + 1));
    CHECK(reported == doctest::Approx(mean_return).epsilon(1e-9));
  }
}

TEST_CASE("step traces reproduce the episode returns") {
  const std::string dir = fresh_dir("steps");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.policies = {PolicyKind::Random};
  cfg.seeds = {5};
  cfg.step_traces = true;
  const ExperimentResult result = run_experiment(cfg);

  std::ifstream steps(dir + "/random_seed5_steps.csv");
  REQUIRE(steps);
  std::string line;
  std::getline(steps, line);  // header
  std::vector<double> per_episode(static_cast<std::size_t>(cfg.episodes), 0.0);
  while (std::getline(steps, line)) {
    // episode,step,action_mask,capacity,latency,power,reward,flags
    int episode = 0, step = 0;
    unsigned mask = 0;
    double cap = 0, lat = 0, pow = 0, reward = 0;
    char flags[8] = {};
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%u,%lf,%lf,%lf,%lf,%4s", &episode, &step,
                        &mask, &cap, &lat, &pow, &reward, flags) == 8);
    per_episode[static_cast<std::size_t>(episode)] += reward;
  }
  const std::vector<EpisodeRecord>& records = result.cells[0].records;
  for (std::size_t e = 0; e < per_episode.size(); ++e) {
    CHECK(per_episode[e] == doctest::Approx(records[e].episode_return).epsilon(1e-9));
  }
}

TEST_CASE("seed fan-out isolates policies from each other") {
  const std::string dir_a = fresh_dir("fanout_a");
  const std::string dir_b = fresh_dir("fanout_b");
  ExperimentConfig cfg = tiny_config(dir_a);
  cfg.policies = {PolicyKind::Random};
  cfg.seeds = {9};
  run_experiment(cfg);
  cfg.policies = {PolicyKind::GreedySnr, PolicyKind::Random, PolicyKind::RoundRobin};
  cfg.out_dir = dir_b;
  run_experiment(cfg);
  CHECK(slurp(dir_a + "/random_seed9.csv") == slurp(dir_b + "/random_seed9.csv"));
}

TEST_CASE("compare reports rankings and flags violations") {
  const std::string dir = fresh_dir("compare");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.policies = {PolicyKind::Random, PolicyKind::RoundRobin, PolicyKind::BsOnly};
  const ExperimentResult result = run_experiment(cfg);
  const CompareReport report = compare(result);
  CHECK(report.text.find("metric capacity_bps") != std::string::npos);
  CHECK(report.text.find("bs_only") != std::string::npos);
  // power check applies: bs_only present but proposed missing -> skipped
  CHECK(report.checks.switching_ok);

  ExperimentResult single;
  single.config = cfg;
  single.config.policies = {PolicyKind::Random};
  CHECK_THROWS_AS(compare(single), ConfigError);
}

TEST_CASE("config file loading applies overrides and validates") {
  const std::string dir = fresh_dir("config");
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/config.json";
  {
    std::ofstream out(path);
    out << R"({
      "policies": ["random", "bs_only"],
      "episodes": 7,
      "seeds": [4, 5],
      "qos_class": "HRLLC",
      "reward_weights": {"capacity": 0.9},
      "mobility": {"uav_speed_mps": 10.0},
      "link_params": {"leo": {"antenna_gain_rx_dbi": 25.0}},
      "out_dir": "somewhere"
    })";
  }
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.policies == std::vector<PolicyKind>{PolicyKind::Random, PolicyKind::BsOnly});
  CHECK(cfg.episodes == 7);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(cfg.qos_class == TrafficClass::Hrllc);
  CHECK(cfg.reward_weights.w_capacity == 0.9);
  CHECK(cfg.reward_weights.w_latency == 0.2);
  CHECK(cfg.mobility.uav_speed_mps == 10.0);
  CHECK(cfg.link_params[3].antenna_gain_rx_dbi == 25.0);
  CHECK(cfg.out_dir == "somewhere");

  {
    std::ofstream out(path);
    out << R"({"policies": ["warp_drive"]})";
  }
  CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
  CHECK_THROWS_AS(load_experiment_config(dir + "/missing.json"), IoError);

  ExperimentConfig profile_cfg;
  apply_profile(profile_cfg, "paper");
  CHECK(profile_cfg.episodes == 10000);
  CHECK_THROWS_AS(apply_profile(profile_cfg, "garage"), ConfigError);
}

TEST_CASE("unwritable output directory raises an io error") {
  ExperimentConfig cfg = tiny_config("/proc/saginmc_forbidden/out");
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
}

TEST_CASE("checkpoint save and load round trip") {
  const std::string dir = fresh_dir("ckpt");
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/net.ckpt";
  std::vector<Mlp> nets;
  nets.push_back(Mlp::xavier({4, 8, 3}, Head::Softmax, 61));
  nets.push_back(Mlp::xavier({4, 8, 3}, Head::Identity, 62));
  save_checkpoint(path, PolicyKind::Proposed, R"({"seed":1})", nets);

  const Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.kind == PolicyKind::Proposed);
  CHECK(ckpt.metadata_json == R"({"seed":1})");
  REQUIRE(ckpt.nets.size() == 2);
  CHECK(ckpt.nets[0].weights[0] == nets[0].weights[0]);
  CHECK(ckpt.nets[1].weights[1] == nets[1].weights[1]);
  CHECK_THROWS_AS(load_checkpoint(dir + "/missing.ckpt"), IoError);
}

#ifdef SAGINMC_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string(SAGINMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST_CASE("cli exit codes follow the contract") {
  CHECK(run_cli("physics") == 0);
  // unknown policy name -> config error
  CHECK(run_cli("train --policy warp_drive --episodes 1 --seed 1 --out /tmp/saginmc_cli") == 2);
  // unknown profile -> config error
  CHECK(run_cli("compare --profile garage") == 2);
  // unwritable output directory -> i/o error
  CHECK(run_cli("train --policy bs_only --episodes 1 --seed 1 --out /proc/saginmc/x") == 3);
  // missing checkpoint -> i/o error
  CHECK(run_cli("eval --checkpoint /tmp/saginmc_missing.ckpt --episodes 1") == 3);
}

TEST_CASE("cli train and eval round trip on a tiny run") {
  const std::string dir = fresh_dir("cli_train");
  CHECK(run_cli("train --policy dqn --episodes 6 --seed 3 --out " + dir) == 0);
  CHECK(std::filesystem::exists(dir + "/dqn_seed3.csv"));
  CHECK(std::filesystem::exists(dir + "/dqn_seed3.ckpt"));
  CHECK(run_cli("eval --checkpoint " + dir + "/dqn_seed3.ckpt --episodes 3 --seed 4 --out " +
                dir) == 0);
  CHECK(std::filesystem::exists(dir + "/dqn_eval.csv"));
  const auto records = read_trace_csv(dir + "/dqn_eval.csv");
  CHECK(records.size() == 3);
}
#endif

TEST_CASE("identical summaries rank as a tie") {
  ExperimentConfig cfg = tiny_config(fresh_dir("tie"));
  cfg.policies = {PolicyKind::Random, PolicyKind::RoundRobin};
  ExperimentResult result;
  result.config = cfg;
  std::vector<EpisodeRecord> records;
  for (int e = 0; e < 10; ++e) {
    records.push_back(EpisodeRecord{e, 5.0, 1e8, 1e-3, 4.0, 0.25});
  }
  for (PolicyKind kind : cfg.policies) {
    for (std::uint64_t seed : cfg.seeds) {
      CellResult cell;
      cell.policy = kind;
      cell.seed = seed;
      cell.records = records;
      result.cells.push_back(std::move(cell));
    }
  }
  const CompareReport report = compare(result);
  CHECK(report.text.find("(gap to next 0)") != std::string::npos);
}

TEST_CASE("smoothed return curves are emitted on request") {
  const std::string dir = fresh_dir("smooth");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.policies = {PolicyKind::BsOnly};
  cfg.seeds = {1};
  cfg.smooth_window = 5;
  run_experiment(cfg);
  std::ifstream in(dir + "/bs_only_seed1_smoothed.csv");
  REQUIRE(in);
  std::string header;
  std::getline(in, header);
  CHECK(header == "episode,return_smoothed");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == cfg.episodes);
}
