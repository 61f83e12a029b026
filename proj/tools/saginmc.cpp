// saginmc — link-selection simulator and policy benchmark for a
// space-air-ground cell (BS / UAV / HAP / LEO downlinks to one UE).
//
// Subcommands: train, compare, eval, gradcheck, physics.
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 ordering violation
// (compare --strict), 1 internal failure.
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sagin/harness.hpp"

namespace {

using namespace sagin;

struct CommonOptions {
  std::string config_path;
  std::string profile;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  int episodes = 0;
  int threads = 0;
};

ExperimentConfig resolve_config(const CommonOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) cfg = load_experiment_config(opt.config_path);
  if (!opt.profile.empty()) apply_profile(cfg, opt.profile);
  if (opt.episodes > 0) cfg.episodes = opt.episodes;
  if (!opt.seeds.empty()) cfg.seeds = opt.seeds;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.threads > 0) cfg.threads = opt.threads;
  return cfg;
}

std::string metadata_json(const ExperimentConfig& cfg, PolicyKind kind,
                          std::uint64_t seed) {
  nlohmann::json meta;
  meta["policy"] = policy_name(kind);
  meta["seed"] = seed;
  meta["episodes"] = cfg.episodes;
  meta["steps_per_episode"] = cfg.steps_per_episode;
  meta["qos_class"] = traffic_class_name(cfg.qos_class);
  meta["reward_weights"] = {cfg.reward_weights.w_capacity, cfg.reward_weights.w_latency,
                            cfg.reward_weights.w_power};
  return meta.dump();
}

int cmd_train(const CommonOptions& opt, const std::string& policy_arg) {
  ExperimentConfig cfg = resolve_config(opt);
  const auto kind = parse_policy(policy_arg);
  if (!kind) throw ConfigError("unknown policy: " + policy_arg);
  cfg.policies = {*kind};

  const ExperimentResult result = run_experiment(cfg);
  for (const CellResult& cell : result.cells) {
    const WindowMeans tail = window_means(cell.records, true, 0.1);
    std::printf("%s seed %" PRIu64 ": return %.4f  capacity %.4g bps  latency %.4g s  "
                "power %.3f W  switch %.3f\n",
                policy_name(cell.policy), cell.seed, tail.episode_return,
                tail.capacity_bps, tail.latency_s, tail.power_w, tail.switch_rate);
    if (!cell.checkpoint_nets.empty()) {
      const std::string path = cfg.out_dir + "/" + policy_name(cell.policy) + "_seed" +
                               std::to_string(cell.seed) + ".ckpt";
      save_checkpoint(path, cell.policy, metadata_json(cfg, cell.policy, cell.seed),
                      cell.checkpoint_nets);
      std::printf("checkpoint written to %s\n", path.c_str());
    }
  }
  std::printf("traces written to %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_compare(const CommonOptions& opt, const std::vector<std::string>& policy_args,
                bool strict) {
  ExperimentConfig cfg = resolve_config(opt);
  if (!policy_args.empty()) {
    cfg.policies.clear();
    for (const std::string& name : policy_args) {
      const auto kind = parse_policy(name);
      if (!kind) throw ConfigError("unknown policy: " + name);
      cfg.policies.push_back(*kind);
    }
  }
  const ExperimentResult result = run_experiment(cfg);
  const CompareReport report = compare(result);
  std::fputs(report.text.c_str(), stdout);
  std::printf("outputs written to %s\n", cfg.out_dir.c_str());
  if (strict && !report.checks.all_ok()) return 4;
  return 0;
}

int cmd_eval(const CommonOptions& opt, const std::string& checkpoint_path) {
  ExperimentConfig cfg = resolve_config(opt);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  GreedyNetPolicy policy(ckpt.nets.front());

  const std::uint64_t seed = cfg.seeds.front();
  Env env(make_env_config(cfg), derive_seed(cell_seed(seed, ckpt.kind), 55));
  const std::vector<EpisodeRecord> records =
      run_policy_episodes(policy, env, cfg.episodes, cfg.steps_per_episode);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
  const std::string trace_path =
      cfg.out_dir + "/" + policy_name(ckpt.kind) + "_eval.csv";
  write_trace_csv(trace_path, records);

  const WindowMeans all = window_means(records, true, 1.0);
  std::printf("eval %s (%s): return %.4f  capacity %.4g bps  latency %.4g s  "
              "power %.3f W  switch %.3f\n",
              policy_name(ckpt.kind), ckpt.metadata_json.c_str(), all.episode_return,
              all.capacity_bps, all.latency_s, all.power_w, all.switch_rate);
  std::printf("trace written to %s\n", trace_path.c_str());
  return 0;
}

int cmd_gradcheck() {
  // 20 small nets across sizes and heads; every one must pass at 1e-4.
  double overall = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int in = 2 + (i % 5);
    const int hidden = 4 + (i % 7) * 3;
    const int out = 2 + (i % 4);
    const Head head = (i % 2 == 0) ? Head::Identity : Head::Softmax;
    const Mlp net = Mlp::xavier({in, hidden, out}, head,
                                derive_seed(9000, static_cast<std::uint64_t>(i)));
    const double err = gradient_check(net, derive_seed(9100, static_cast<std::uint64_t>(i)));
    overall = std::max(overall, err);
    std::printf("net %2d  %d-%d-%d %s: max relative error %.3e\n", i, in, hidden, out,
                head == Head::Softmax ? "softmax" : "identity", err);
  }
  std::printf("overall max relative error %.3e (tolerance 1e-4)\n", overall);
  return overall < 1e-4 ? 0 : 1;
}

int cmd_physics() {
  const LinkParamsTable params = default_link_params();
  std::printf("unit anchors\n");
  std::printf("  FSPL(100 m, 28 GHz)        = %.4f dB\n", fspl_db(100.0, 28e9));
  std::printf("  FSPL(550 km, 27 GHz)       = %.4f dB\n", fspl_db(550e3, 27e9));
  std::printf("  noise floor(100 MHz, NF 7) = %.4f dBm\n", noise_floor_dbm(100e6, 7.0));
  std::printf("  propagation delay(550 km)  = %.6f ms\n",
              link_latency_s(550e3, 1e300, 0.0, 0.1) * 1e3);
  std::printf("\nreference link budgets (UE at cell center, LOS)\n");
  WorldState world;
  world.leo_arc_deg = 90.0;  // satellite at zenith
  for (int i = 0; i < kLinkCount; ++i) {
    const LinkKind kind = kAllLinks[static_cast<std::size_t>(i)];
    const LinkParams& p = params[static_cast<std::size_t>(i)];
    const double d = link_distance_m(kind, world);
    const double pl = path_loss_db(d, p.carrier_frequency_hz, true);
    const double snr = snr_db(p, pl);
    const double cap = link_capacity_bps(p.bandwidth_hz, snr, 0.0);
    const double lat = link_latency_s(d, cap, 12000.0, 0.1);
    std::printf("  %-4s d=%.4g m  PL=%.2f dB  SNR=%+.2f dB  C=%.4g bps  T=%.4g s  "
                "P=%.0f W\n",
                link_name(kind), d, pl, snr, cap, lat, p.power_cost_w);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAGIN multiconnectivity link-selection simulator and benchmark"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string policy_arg = "proposed";
  std::vector<std::string> compare_policies;
  std::string checkpoint_path;
  bool strict = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON config file");
    cmd->add_option("--profile", opt.profile, "desk (2000 episodes) or paper (10000)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seeds, "replica seed(s)");
    cmd->add_option("--episodes", opt.episodes, "episode count override");
    cmd->add_option("--threads", opt.threads, "max concurrent cells");
  };

  CLI::App* train = app.add_subcommand("train", "train/run one policy");
  add_common(train);
  train->add_option("--policy", policy_arg, "policy to run");

  CLI::App* cmp = app.add_subcommand("compare", "full baseline sweep plus report");
  add_common(cmp);
  cmp->add_option("--policy", compare_policies, "restrict to these policies");
  cmp->add_flag("--strict", strict, "exit 4 when a reference ordering is violated");

  CLI::App* eval = app.add_subcommand("eval", "run a frozen checkpoint greedily");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  app.add_subcommand("gradcheck", "finite-difference verification of the nets");
  app.add_subcommand("physics", "print the radio unit anchors and link budgets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(opt, policy_arg);
    if (cmp->parsed()) return cmd_compare(opt, compare_policies, strict);
    if (eval->parsed()) return cmd_eval(opt, checkpoint_path);
    if (app.get_subcommand("gradcheck")->parsed()) return cmd_gradcheck();
    if (app.get_subcommand("physics")->parsed()) return cmd_physics();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
