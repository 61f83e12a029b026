// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// The heavyweight part is a full desk-scale sweep (2000 episodes x 50 steps
// x 3 seeds x all seven policies); on a multicore machine the cells run in
// parallel.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sagin/harness.hpp"

using namespace sagin;

namespace {

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, bool pass, std::string detail) {
  g_results.push_back({id, pass, std::move(detail)});
}

std::string fresh_dir(const char* tag) {
  const std::string path =
      (std::filesystem::temp_directory_path() / (std::string("saginmc_accept_") + tag))
          .string();
  std::filesystem::remove_all(path);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::string("<unreadable:") + path + ">";
  return std::string(std::istreambuf_iterator<char>(in), {});
}

char fmt_buf[512];

// ---- C1: finite-difference verification over 20 random small nets ----
void criterion_gradcheck() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int in = 2 + (i % 5);
    const int hidden = 4 + (i % 7) * 3;
    const int out = 2 + (i % 4);
    const Head head = (i % 2 == 0) ? Head::Identity : Head::Softmax;
    const Mlp net = Mlp::xavier({in, hidden, out}, head,
                                derive_seed(9000, static_cast<std::uint64_t>(i)));
    worst = std::max(worst,
                     gradient_check(net, derive_seed(9100, static_cast<std::uint64_t>(i))));
  }
  std::snprintf(fmt_buf, sizeof(fmt_buf),
                "max relative error %.3e over 20 nets (tolerance 1e-4)", worst);
  record(1, worst < 1e-4, fmt_buf);
}

// ---- C2: radio unit anchors ----
void criterion_physics() {
  const double fspl = fspl_db(100.0, 28e9);
  const double floor = noise_floor_dbm(100e6, 7.0);
  const double delay = link_latency_s(550e3, 1e300, 0.0, 0.1);
  const bool ok = std::abs(fspl - 101.39) <= 0.01 && std::abs(floor + 87.0) <= 0.01 &&
                  std::abs(delay - 1.834e-3) <= 1e-6;
  std::snprintf(fmt_buf, sizeof(fmt_buf),
                "FSPL(100m,28GHz)=%.4f dB, noise floor(100MHz,NF7)=%.4f dBm, "
                "delay(550km)=%.6f ms",
                fspl, floor, delay * 1e3);
  record(2, ok, fmt_buf);
}

// ---- C3: trained agent vs the exhaustive oracle on a frozen snapshot ----
void criterion_frozen_optimality() {
  EnvConfig env_cfg;
  env_cfg.frozen = true;
  const EnvFactory factory = [env_cfg](std::uint64_t s) { return Env(env_cfg, s); };
  const std::uint64_t seed = 4242;

  AgentConfig agent_cfg;
  TrainResult trained = train_actor_critic(factory, agent_cfg, 400, 50, seed);

  // identical stream derivation gives the identical frozen snapshot
  Env env = factory(derive_seed(seed, 21));
  Observation obs = env.reset();
  const ActionIndex oracle = best_action_exhaustive(env.current_metrics(), env_cfg.reward);

  int matches = 0;
  const int total = 1000;
  for (int step = 0; step < total; ++step) {
    const int action = greedy_action(trained.agent.actor(), obs);
    if (action == oracle.index) ++matches;
    StepOutcome outcome = env.step(ActionIndex{action});
    obs = std::move(outcome.observation);
    if (outcome.done) obs = env.reset();
  }
  const double rate = static_cast<double>(matches) / total;
  std::snprintf(fmt_buf, sizeof(fmt_buf),
                "greedy matches oracle action (mask %u) on %.1f%% of %d frozen steps "
                "(threshold 90%%)",
                oracle.bitmask(), rate * 100.0, total);
  record(3, rate >= 0.9, fmt_buf);
}

// ---- C9: byte-identical reruns, library path and CLI path ----
void criterion_determinism() {
  ExperimentConfig cfg;
  cfg.policies = {PolicyKind::Random, PolicyKind::Proposed};
  cfg.episodes = 30;
  cfg.seeds = {1, 2};
  cfg.threads = 1;

  bool ok = true;
  std::string detail = "library reruns byte-identical";
  const std::string dir_a = fresh_dir("det_a");
  const std::string dir_b = fresh_dir("det_b");
  cfg.out_dir = dir_a;
  run_experiment(cfg);
  cfg.out_dir = dir_b;
  run_experiment(cfg);
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const std::string name = entry.path().filename().string();
    if (slurp(dir_a + "/" + name) != slurp(dir_b + "/" + name)) {
      ok = false;
      detail = "library rerun mismatch in " + name;
      break;
    }
  }

#ifdef SAGINMC_CLI_PATH
  if (ok) {
    const std::string dir_c = fresh_dir("det_c");
    const std::string dir_d = fresh_dir("det_d");
    const std::string cfg_path = fresh_dir("det_cfg") + ".json";
    {
      std::ofstream out(cfg_path);
      out << R"({"policies":["random","proposed"],"episodes":30,"seeds":[1,2],)"
          << R"("threads":1})";
    }
    const auto run_cli = [&](const std::string& dir) {
      const std::string cmd = std::string(SAGINMC_CLI_PATH) + " compare --config " +
                              cfg_path + " --out " + dir + " > /dev/null";
      return std::system(cmd.c_str());
    };
    if (run_cli(dir_c) != 0 || run_cli(dir_d) != 0) {
      ok = false;
      detail = "CLI compare returned nonzero";
    } else {
      for (const auto& entry : std::filesystem::directory_iterator(dir_c)) {
        const std::string name = entry.path().filename().string();
        if (slurp(dir_c + "/" + name) != slurp(dir_d + "/" + name)) {
          ok = false;
          detail = "CLI rerun mismatch in " + name;
          break;
        }
      }
      if (ok) detail = "library and CLI reruns byte-identical";
    }
  }
#endif
  record(9, ok, detail);
}

// ---- C10: toy MDP vs tabular value iteration ----
void criterion_toy_mdp() {
  //   s0: a0 -> r 0.0 go s1 | a1 -> r 0.1 stay s0
  //   s1: a0 -> r 0.0 stay s1 | a1 -> r 1.0 go s0
  const auto encode = [](int s) {
    return s == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  };
  struct R {
    double reward;
    int next;
  };
  const auto transition = [](int s, int a) {
    if (s == 0) return a == 0 ? R{0.0, 1} : R{0.1, 0};
    return a == 0 ? R{0.0, 1} : R{1.0, 0};
  };

  // oracle: tabular value iteration
  std::array<std::array<double, 2>, 2> q{};
  for (int sweep = 0; sweep < 10000; ++sweep) {
    std::array<std::array<double, 2>, 2> next{};
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const R r = transition(s, a);
        next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
            r.reward + 0.99 * std::max(q[static_cast<std::size_t>(r.next)][0],
                                       q[static_cast<std::size_t>(r.next)][1]);
      }
    }
    q = next;
  }
  const std::array<int, 2> optimal{q[0][0] >= q[0][1] ? 0 : 1,
                                   q[1][0] >= q[1][1] ? 0 : 1};

  AgentConfig ac_cfg;
  ac_cfg.hidden = {32, 32};
  ActorCriticAgent agent(2, 2, ac_cfg, 515);
  int state = 0;
  for (int updates = 0; updates < 20000;) {
    const std::vector<double> obs = encode(state);
    const int action = agent.select_action(obs, ActionMode::Sample);
    const R r = transition(state, action);
    agent.observe(Transition{obs, action, r.reward, encode(r.next), false});
    state = r.next;
    if (agent.ready_to_update()) {
      agent.update_from_replay();
      ++updates;
    }
  }
  const bool agent_ok = agent.select_action(encode(0), ActionMode::Greedy) == optimal[0] &&
                        agent.select_action(encode(1), ActionMode::Greedy) == optimal[1];

  DqnConfig dqn_cfg;
  dqn_cfg.hidden = {32, 32};
  DqnAgent dqn(2, 2, dqn_cfg, 616);
  state = 0;
  for (int updates = 0; updates < 20000;) {
    const std::vector<double> obs = encode(state);
    const int action = dqn.select_action(obs, 0.2);
    const R r = transition(state, action);
    dqn.observe(Transition{obs, action, r.reward, encode(r.next), false});
    state = r.next;
    if (dqn.ready_to_update()) {
      dqn.update();
      ++updates;
    }
  }
  const bool dqn_ok = dqn.greedy_action(encode(0)) == optimal[0] &&
                      dqn.greedy_action(encode(1)) == optimal[1];

  std::snprintf(fmt_buf, sizeof(fmt_buf),
                "within 20k updates: actor-critic greedy %s, dqn greedy %s "
                "(oracle actions %d/%d)",
                agent_ok ? "optimal" : "suboptimal", dqn_ok ? "optimal" : "suboptimal",
                optimal[0], optimal[1]);
  record(10, agent_ok && dqn_ok, fmt_buf);
}

// ---- C4-C8: desk-scale sweep orderings ----
void criteria_sweep() {
  ExperimentConfig cfg;  // defaults are the desk profile: 2000 x 50 x seeds {1,2,3}
  cfg.out_dir = fresh_dir("sweep");

  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(cfg);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
      60.0;

  std::printf("\ndesk-scale sweep finished in %.1f min; last-10%% means per policy:\n",
              minutes);
  for (PolicyKind kind : cfg.policies) {
    double ret = 0, cap = 0, lat = 0, pow = 0, sw = 0;
    const double n = static_cast<double>(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
      const WindowMeans w = window_means(result.cell(kind, seed).records, true, 0.1);
      ret += w.episode_return / n;
      cap += w.capacity_bps / n;
      lat += w.latency_s / n;
      pow += w.power_w / n;
      sw += w.switch_rate / n;
    }
    std::printf("  %-11s return %8.2f  capacity %.3e  latency %.3e  power %5.2f  "
                "switch %.3f\n",
                policy_name(kind), ret, cap, lat, pow, sw);
  }
  std::printf("\n");

  const CompareReport report = compare(result);
  std::fputs(report.text.c_str(), stdout);
  std::printf("\n");

  record(4, report.checks.convergence_ok,
         "proposed mean return exceeds DQN and PPO on at least 2 of 3 seeds");
  record(5, report.checks.switching_ok,
         "proposed switching rate, last 10% of episodes, under 25% of its first-10% mean");
  record(6, report.checks.capacity_ok,
         "BS-only lowest capacity everywhere; proposed highest on at least 2 of 3 seeds");
  record(7, report.checks.latency_ok,
         "proposed latency under random/round-robin everywhere; lowest on 2 of 3 seeds");
  record(8, report.checks.power_ok,
         "BS-only mean power exactly 2 W; proposed above it on every seed");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criterion_gradcheck();
  criterion_physics();
  criterion_frozen_optimality();
  criterion_determinism();
  criterion_toy_mdp();
  criteria_sweep();

  std::sort(g_results.begin(), g_results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failures = 0;
  for (const Criterion& c : g_results) {
    std::printf("[%s] criterion %2d: %s\n", c.pass ? "PASS" : "FAIL", c.id,
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 1;
}
