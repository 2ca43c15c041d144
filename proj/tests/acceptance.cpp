// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//   decoysim_acceptance fast             quick criteria (minutes)
//   decoysim_acceptance desk [--out D]   500k-step 3x3x3 experiment
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>

#include "decoysim/error.hpp"
#include "decoysim/evalharness.hpp"
#include "decoysim/experiment.hpp"
#include "decoysim/hashing.hpp"
#include "oracles.hpp"

using namespace decoysim;

namespace {

int failed = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
  if (!pass) ++failed;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void fixture_fidelity() {
  Stopwatch sw;
  const auto checks = check_shipped_fixtures(oracle::data_dir());
  std::size_t ok = 0;
  std::string first_bad;
  for (const auto& c : checks) {
    if (c.passed()) ++ok;
    else if (first_bad.empty()) {
      first_bad = fmt::format(" first mismatch {}/{} {}.{} {} != {}", c.agent, c.persona,
                              c.action, c.field, c.actual, c.expected);
    }
  }
  const double t = sw.seconds();
  report("fixture_fidelity", checks.size() == 54 && ok == checks.size() && t < 1.0,
         fmt::format("{}/{} table values exact in {:.3f}s{}", ok, checks.size(), t, first_bad));
}

void reward_oracle() {
  Stopwatch sw;
  const char* blues[] = {"baseline", "proactive_v1", "proactive_v2"};
  const char* reds[] = {"baseline", "aggressive", "stealthy"};
  Rng rng(2024);
  double worst = 0.0;
  std::size_t steps = 0;
  for (int ep = 0; ep < 1000; ++ep) {
    EnvConfig cfg = oracle::env_config(blues[rng.below(3)], reds[rng.below(3)], 50);
    const double m = (ep % 2) ? 2.5 : 1.0;
    cfg.reward_options.decoy_hit_multiplier = m;
    DefenseEnv env(cfg);
    env.reset(static_cast<std::uint64_t>(ep));
    std::vector<double> got;
    std::vector<oracle::RewardEvent> events;
    for (int t = 0; t < 50; ++t) {
      got.push_back(env.step(rng.below(env.action_count())).reward);
      const StepLog& log = env.last_step();
      events.push_back({std::string(log.blue_action.base_name()),
                        std::string(to_string(log.red.action)), log.target_was_decoy});
    }
    const auto want = oracle::composite_rewards(events, oracle::table(cfg.blue_rewards),
                                                oracle::table(cfg.red_rewards), m);
    for (std::size_t t = 0; t < want.size(); ++t) {
      worst = std::max(worst, std::abs(got[t] - want[t]) / std::max(1.0, std::abs(want[t])));
      ++steps;
    }
  }
  const double t = sw.seconds();
  report("reward_oracle", worst <= 1e-12 && t < 10.0,
         fmt::format("{} steps, worst relative error {:.3g} (tol 1e-12) in {:.2f}s", steps,
                     worst, t));
}

void gae_oracle() {
  Stopwatch sw;
  Rng rng(99);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    TrajectoryBatch b;
    const std::size_t T = 1 + rng.below(256);
    for (std::size_t t = 0; t < T; ++t) {
      b.rewards.push_back(50.0 * rng.normal());
      b.values.push_back(20.0 * rng.normal());
      b.dones.push_back(rng.uniform() < 0.05 ? 1 : 0);
    }
    b.bootstrap_value = 20.0 * rng.normal();
    const GaeResult g = compute_gae(b, 0.99, 0.95);
    const auto want = oracle::gae(b.rewards, b.values, b.dones, b.bootstrap_value, 0.99, 0.95);
    for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(g.advantages[t] - want[t]));
  }
  const double t = sw.seconds();
  report("gae_oracle", worst <= 1e-6 && t < 5.0,
         fmt::format("200 batches, worst absolute error {:.3g} (tol 1e-6) in {:.2f}s", worst, t));
}

void gradient_checks() {
  Stopwatch sw;
  Rng rng(7);
  ActorCritic net(8, 5, {16, 16});
  net.initialize(rng);
  for (double& p : net.parameters()) p += 0.2 * rng.normal();

  LossBatch b;
  const Eigen::Index n = 32;
  b.observations = Matrix(8, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < 8; ++r) b.observations(r, c) = rng.normal();
  }
  const Matrix logits = net.logits(b.observations);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto a = static_cast<std::size_t>(rng.below(5));
    b.actions.push_back(a);
    // Ratio exactly one: well inside the clip band.
    b.old_log_probs.push_back(log_softmax(logits.col(c))(static_cast<Eigen::Index>(a)));
    b.advantages.push_back(rng.normal());
    b.returns.push_back(5.0 * rng.normal());
  }

  auto check = [&](const char* what, const LossWeights& w) {
    std::vector<double> analytic(net.parameters().size());
    ppo_loss(net, b, w, analytic);
    ActorCritic probe = net;
    const auto numeric = oracle::numeric_gradient(net.parameters(), [&](const std::vector<double>& p) {
      probe.parameters() = p;
      return ppo_loss(probe, b, w).total;
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return std::pair<std::string, double>{what, worst};
  };
  LossWeights value_only{0.2, 0.0, 0.5, false};
  LossBatch saved = b;
  std::fill(b.advantages.begin(), b.advantages.end(), 0.0);
  const auto v = check("value", value_only);
  b = saved;
  const auto p = check("policy", LossWeights{0.2, 0.0, 0.0, true});
  const double t = sw.seconds();
  report("gradient_checks", v.second < 1e-4 && p.second < 1e-4 && t < 30.0,
         fmt::format("value loss {:.3g}, unclipped policy loss {:.3g} relative (tol 1e-4) in {:.2f}s",
                     v.second, p.second, t));
}

void bandit_convergence() {
  Stopwatch sw;
  int solved = 0;
  std::string probs;
  for (std::uint64_t seed : {1, 2, 3}) {
    PpoConfig cfg;
    cfg.seed = seed;
    cfg.total_timesteps = 50'000;
    cfg.hidden = {16, 16};
    PpoTrainer t([](std::size_t) { return std::make_unique<oracle::BanditEnv>(); }, cfg);
    const ActorCritic net = t.train();
    const std::vector<double> obs = {1.0, 0.0, 1.0, 0.0};
    const double pbest = oracle::softmax_probability(net.logits(std::span<const double>(obs)), 1);
    solved += pbest >= 0.95 ? 1 : 0;
    probs += fmt::format(" {:.4f}", pbest);
  }
  const double t = sw.seconds();
  report("ppo_bandit", solved == 3 && t < 180.0,
         fmt::format("{}/3 seeds reach p(best) >= 0.95 within 50k steps:{} in {:.1f}s", solved,
                     probs, t));
}

void ccdf_oracle() {
  Rng rng(5);
  std::size_t mismatches = 0, comparisons = 0;
  for (int k = 0; k < 500; ++k) {
    std::vector<std::optional<int>> xs;
    const std::size_t n = 1 + rng.below(100);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.1) xs.push_back(std::nullopt);
      else xs.push_back(static_cast<int>(rng.below(101)));
    }
    for (CensorMode mode : {CensorMode::kInclude, CensorMode::kExclude}) {
      const bool inc = mode == CensorMode::kInclude;
      const std::size_t m = oracle::sample_count(xs, inc);
      if (m == 0) continue;
      const Ccdf d = ccdf(xs, 100, mode);
      for (int x = 0; x <= 100; ++x) {
        ++comparisons;
        const std::size_t want = oracle::count_exceeding(xs, x, inc);
        if (d.count_exceeding(x) != want ||
            d.exceedance(x) != static_cast<double>(want) / static_cast<double>(m)) {
          ++mismatches;
        }
      }
      ++comparisons;
      if (exceedance_percentile(d, 0.95) != oracle::exceedance_percentile(xs, 100, 95, inc)) {
        ++mismatches;
      }
    }
  }
  report("ccdf_oracle", mismatches == 0,
         fmt::format("{} comparisons over 500 sample sets, {} mismatches", comparisons,
                     mismatches));
}

void determinism(const std::filesystem::path& root) {
  Stopwatch sw;
  RunConfig cfg;
  cfg.ppo.total_timesteps = 10'000;
  const char* files[] = {"metrics.csv", "policy.json", "policy.f32", "eval/episodes.csv",
                         "eval/trajectories.csv", "eval/blue_actions.csv", "eval/ccdf.dat"};
  std::vector<std::filesystem::path> dirs = {root / "determinism_a", root / "determinism_b"};
  for (const auto& d : dirs) {
    std::filesystem::remove_all(d);
    const TrainOutput out = train_run(cfg, "proactive_v2", "aggressive", 11, d);
    evaluate_run(cfg, out.checkpoint, "proactive_v2", "aggressive", 11, d / "eval");
  }
  std::string differing;
  for (const char* f : files) {
    if (read_file(dirs[0] / f) != read_file(dirs[1] / f)) differing += std::string(" ") + f;
  }
  report("determinism", differing.empty(),
         differing.empty()
             ? fmt::format("10k-step train + eval twice: {} files byte-identical ({:.1f}s)",
                           std::size(files), sw.seconds())
             : "differing:" + differing);
}

void red_stationarity() {
  const char* reds[] = {"baseline", "aggressive", "stealthy"};
  ScriptedPolicy script([](int step, std::span<const double>) {
    return static_cast<std::size_t>(step % 7);
  });
  EvalOptions opts;
  opts.episodes = 200;
  opts.base_seed = 500;
  std::vector<std::map<std::string, double>> freqs;
  for (const char* r : reds) {
    const auto recs = evaluate(script, oracle::env_config("proactive_v1", r), opts);
    freqs.push_back(red_action_frequencies(recs, false));
  }
  double worst = 0.0;
  for (const auto& f : freqs) {
    for (RedAction a : kRedActions) {
      const std::string name(to_string(a));
      auto get = [&](const std::map<std::string, double>& m) {
        const auto it = m.find(name);
        return it == m.end() ? 0.0 : it->second;
      };
      worst = std::max(worst, std::abs(get(f) - get(freqs[0])));
    }
  }
  report("red_stationarity", worst < 0.05,
         fmt::format("200 episodes per red persona, max L-inf difference {:.4f} (tol 0.05)",
                     worst));
}

// --- desk-scale experiment -------------------------------------------------

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void desk_scale(const std::filesystem::path& out) {
  Stopwatch sw;
  RunConfig cfg;
  cfg.seeds = {1, 2, 3};
  cfg.output_dir = out;
  cfg.ppo.total_timesteps = 500'000;
  cfg.eval_episodes = 50;
  cfg.eval_steps = 100;
  const MatrixReport rep = run_matrix(cfg, [](const std::string& line) {
    std::cerr << line << "\n";
  });
  fmt::print("desk-scale matrix finished in {:.0f}s ({} cells)\n", sw.seconds(), rep.cells.size());

  std::map<std::string, std::map<std::string, std::map<std::uint64_t, const CellSummary*>>> by;
  for (const auto& c : rep.cells) by[c.red][c.blue][c.seed] = &c;

  // Uniform-random blue on the same evaluation episodes.
  std::map<std::string, std::map<std::uint64_t, int>> random_exc;
  for (const auto& red : cfg.matrix_red) {
    for (std::uint64_t seed : cfg.seeds) {
      UniformRandomPolicy rnd(7);
      EvalOptions opts;
      opts.episodes = cfg.eval_episodes;
      opts.steps = cfg.eval_steps;
      opts.base_seed = cfg.evaluation_seed(seed);
      const auto recs = evaluate(rnd, oracle::env_config("baseline", red, cfg.max_steps), opts);
      random_exc[red][seed] =
          summarize("uniform_random", red, seed, recs, cfg.eval_steps).exceedance_95;
    }
  }

  const auto& ref = published_reference();
  fmt::print("{:<12} {:<14} {:>14} {:>8} {:>8} {:>8} {:>8}\n", "red", "blue",
             "exceedance95", "median", "random", "publ.", "decoy%");
  for (const auto& red : cfg.matrix_red) {
    std::vector<double> rnd;
    for (auto s : cfg.seeds) rnd.push_back(random_exc[red][s]);
    for (const auto& blue : cfg.matrix_blue) {
      std::vector<double> ex;
      std::string per_seed, decoy;
      for (auto s : cfg.seeds) {
        const CellSummary& c = *by[red][blue][s];
        ex.push_back(c.exceedance_95);
        per_seed += fmt::format("{}{}", per_seed.empty() ? "" : "/", c.exceedance_95);
        const auto it = c.blue_freq_pre_impact.find("decoy0");
        decoy += fmt::format("{}{:.3f}", decoy.empty() ? "" : "/",
                             it == c.blue_freq_pre_impact.end() ? 0.0 : it->second);
      }
      fmt::print("{:<12} {:<14} {:>14} {:>8} {:>8} {:>8} {}\n", red, blue, per_seed, median(ex),
                 median(rnd), ref.exceedance_95.at(red).at(blue), decoy);
    }
  }
  for (const auto& [red, m] : ref.decoy_fraction) {
    for (const auto& [blue, f] : m) {
      fmt::print("published pre-impact decoy fraction {} vs {}: {:.3f}\n", blue, red, f);
    }
  }

  // (a) every trained blue beats uniform random by 1.2x on the median.
  std::string worst_a;
  double worst_ratio = 1e9;
  for (const auto& red : cfg.matrix_red) {
    std::vector<double> rnd;
    for (auto s : cfg.seeds) rnd.push_back(random_exc[red][s]);
    for (const auto& blue : cfg.matrix_blue) {
      std::vector<double> ex;
      for (auto s : cfg.seeds) ex.push_back(by[red][blue][s]->exceedance_95);
      const double ratio = median(ex) / std::max(1.0, median(rnd));
      if (ratio < worst_ratio) {
        worst_ratio = ratio;
        worst_a = fmt::format("{} vs {}", blue, red);
      }
    }
  }
  std::string cells_a;
  for (const auto& red : cfg.matrix_red) {
    std::vector<double> rnd;
    for (auto s : cfg.seeds) rnd.push_back(random_exc[red][s]);
    for (const auto& blue : cfg.matrix_blue) {
      std::vector<double> ex;
      for (auto s : cfg.seeds) ex.push_back(by[red][blue][s]->exceedance_95);
      cells_a += fmt::format(" {}/{}={:.2f}", blue, red, median(ex) / std::max(1.0, median(rnd)));
    }
  }
  report("desk_scale_a_beats_random", worst_ratio >= 1.2,
         fmt::format("min median ratio {:.3f} ({}), need >= 1.2;{}", worst_ratio, worst_a,
                     cells_a));

  // (b) proactive_v2 >= baseline against stealthy and aggressive in >= 2/3 seeds.
  bool ok_b = true;
  std::string detail_b;
  for (const char* red : {"stealthy", "aggressive"}) {
    int wins = 0;
    for (auto s : cfg.seeds) {
      wins += by[red]["proactive_v2"][s]->exceedance_95 >= by[red]["baseline"][s]->exceedance_95;
    }
    ok_b = ok_b && wins >= 2;
    detail_b += fmt::format(" {}: {}/{} seeds", red, wins, cfg.seeds.size());
  }
  report("desk_scale_b_v2_vs_baseline", ok_b,
         "proactive_v2 exceedance >= baseline blue, need >= 2 of 3 seeds;" + detail_b);

  // (c) proactive_v1 places more decoys than baseline blue before first impact.
  int wins_c = 0;
  std::string detail_c;
  for (auto s : cfg.seeds) {
    auto frac = [&](const char* blue) {
      const auto& f = by["baseline"][blue][s]->blue_freq_pre_impact;
      const auto it = f.find("decoy0");
      return it == f.end() ? 0.0 : it->second;
    };
    const double v1 = frac("proactive_v1"), base = frac("baseline");
    wins_c += v1 > base;
    detail_c += fmt::format(" seed {}: {:.3f} vs {:.3f}", s, v1, base);
  }
  report("desk_scale_c_v1_decoys", wins_c == static_cast<int>(cfg.seeds.size()),
         "pre-impact decoy fraction vs baseline red, v1 vs baseline blue;" + detail_c);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "fast";
  std::filesystem::path out = std::filesystem::temp_directory_path() / "decoysim_acceptance";
  for (int i = 2; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0) out = argv[i + 1];
  }
  try {
    if (mode == "fast") {
      std::filesystem::create_directories(out);
      fixture_fidelity();
      reward_oracle();
      gae_oracle();
      gradient_checks();
      bandit_convergence();
      ccdf_oracle();
      determinism(out);
      red_stationarity();
    } else if (mode == "desk") {
      desk_scale(out);
    } else {
      std::cerr << "usage: decoysim_acceptance fast|desk [--out DIR]\n";
      return 2;
    }
  } catch (const Error& e) {
    report("acceptance_run", false, fmt::format("{}: {}", e.qualified_code(), e.what()));
  }
  fmt::print("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
