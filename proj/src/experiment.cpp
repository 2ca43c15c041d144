#include "decoysim/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "decoysim/error.hpp"
#include "decoysim/hashing.hpp"

namespace decoysim {
namespace {

using nlohmann::json;

json cell_json(const CellSummary& c) {
  json points = json::array();
  for (const auto& [x, p] : c.ccdf_points) points.push_back({x, p});
  return json{{"blue", c.blue},
              {"red", c.red},
              {"seed", c.seed},
              {"episodes", c.records.size()},
              {"censored_episodes", c.censored},
              {"exceedance_95", c.exceedance_95},
              {"exceedance_95_excluding_censored", c.exceedance_95_excluding_censored},
              {"order_statistic_95", c.order_statistic_95},
              {"ccdf_points", points},
              {"blue_action_frequencies", c.blue_freq},
              {"blue_action_frequencies_pre_impact", c.blue_freq_pre_impact},
              {"red_action_frequencies", c.red_freq},
              {"mean_total_reward", c.mean_total_reward}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_double(double v) { return fmt::format("{:.9g}", v); }

bool reusable(const std::filesystem::path& checkpoint, const FixtureSet& fx,
              const PpoConfig& ppo) {
  if (!std::filesystem::exists(checkpoint)) return false;
  try {
    const Checkpoint cp = load_checkpoint(checkpoint);
    return cp.meta.fixtures == fx.hashes &&
           cp.meta.config.total_timesteps == ppo.total_timesteps &&
           cp.meta.config.seed == ppo.seed && cp.meta.config.hidden == ppo.hidden;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

FixtureSet load_fixture_set(const RunConfig& cfg, const std::string& blue,
                            const std::string& red) {
  const std::string network_text = read_file(cfg.resolve_network());
  const std::string blue_text = read_file(cfg.resolve_persona(AgentKind::kBlue, blue));
  const std::string red_text = read_file(cfg.resolve_persona(AgentKind::kRed, red));
  RewardStructure blue_rs = RewardStructure::load(blue_text);
  RewardStructure red_rs = RewardStructure::load(red_text);
  if (blue_rs.agent() != AgentKind::kBlue || red_rs.agent() != AgentKind::kRed) {
    throw Error(ErrorCode::kSchema, "rewards",
                "blue/red fixture paths point at the wrong agent kind");
  }
  FixtureSet out{
      EnvConfig{NetworkConfig::parse(network_text), std::move(blue_rs), std::move(red_rs),
                cfg.max_steps, RewardOptions{cfg.decoy_hit_multiplier}},
      FixtureHashes{sha256_hex(network_text), sha256_hex(blue_text), sha256_hex(red_text)},
      persona_label(blue), persona_label(red)};
  return out;
}

std::string metrics_csv_header() {
  return "update_idx,global_step,mean_episodic_return,policy_loss,value_loss,"
         "entropy,clip_fraction,approx_kl,lr\n";
}

std::string metrics_csv_row(const UpdateMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{},{},{}\n", m.update, m.global_step,
                     m.mean_episodic_return ? format_double(*m.mean_episodic_return) : "",
                     format_double(m.policy_loss), format_double(m.value_loss),
                     format_double(m.entropy), format_double(m.clip_fraction),
                     format_double(m.approx_kl), format_double(m.learning_rate));
}

TrainOutput train_run(const RunConfig& cfg, const std::string& blue,
                      const std::string& red, std::uint64_t seed,
                      const std::filesystem::path& out_dir,
                      const std::function<void(const UpdateMetrics&)>& on_update) {
  const FixtureSet fx = load_fixture_set(cfg, blue, red);
  PpoConfig ppo = cfg.ppo;
  ppo.seed = seed;
  std::filesystem::create_directories(out_dir);

  TrainOutput out;
  out.metrics_csv = out_dir / "metrics.csv";
  std::string csv = metrics_csv_header();
  PpoTrainer trainer(
      [&](std::size_t) { return std::make_unique<DefenseEnv>(fx.env); }, ppo);
  const ActorCritic net = trainer.train([&](const UpdateMetrics& m) {
    out.metrics.push_back(m);
    csv += metrics_csv_row(m);
    if (on_update) on_update(m);
  });
  write_file(out.metrics_csv, csv);

  CheckpointMetadata meta;
  meta.blue_persona = fx.blue_persona;
  meta.red_persona = fx.red_persona;
  meta.config = ppo;
  meta.fixtures = fx.hashes;
  meta.global_steps = out.metrics.empty() ? 0 : out.metrics.back().global_step;
  meta.decoy_hit_multiplier = cfg.decoy_hit_multiplier;
  meta.max_steps = cfg.max_steps;
  out.checkpoint = save_checkpoint(out_dir / "policy.json", net, meta);
  return out;
}

CellSummary summarize(std::string blue, std::string red, std::uint64_t seed,
                      std::vector<EpisodeRecord> records, int censored_at) {
  CellSummary c;
  c.blue = std::move(blue);
  c.red = std::move(red);
  c.seed = seed;
  const auto impacts = first_impacts(records);
  const Ccdf included = ccdf(impacts, censored_at, CensorMode::kInclude);
  c.exceedance_95 = exceedance_percentile(included, 0.95);
  c.order_statistic_95 = order_statistic_percentile(included, 0.95);
  c.censored = included.censored_count();
  c.exceedance_95_excluding_censored =
      c.censored == included.sample_count()
          ? censored_at
          : exceedance_percentile(ccdf(impacts, censored_at, CensorMode::kExclude), 0.95);
  c.ccdf_points = included.points();
  c.blue_freq = blue_action_frequencies(records, false);
  c.blue_freq_pre_impact = blue_action_frequencies(records, true);
  c.red_freq = red_action_frequencies(records, false);
  double total = 0.0;
  for (const auto& r : records) total += r.total_reward;
  c.mean_total_reward = records.empty() ? 0.0 : total / static_cast<double>(records.size());
  c.records = std::move(records);
  return c;
}

CellSummary evaluate_run(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                         const std::string& blue, const std::string& red,
                         std::uint64_t seed, const std::filesystem::path& out_dir) {
  const FixtureSet fx = load_fixture_set(cfg, blue, red);
  EvalOptions opts;
  opts.episodes = cfg.eval_episodes;
  opts.steps = cfg.eval_steps;
  opts.base_seed = cfg.evaluation_seed(seed);
  opts.greedy = cfg.greedy;
  std::vector<std::vector<StepLog>> traces;
  auto records = evaluate_checkpoint(checkpoint, fx.env, fx.hashes, opts, &traces);

  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "episodes.csv", episodes_csv(records));
  std::string traj = "episode," + trajectory_csv({}).substr(0);
  std::string blue_log = "episode," + blue_action_csv({});
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const std::string t = trajectory_csv(traces[e]);
    const std::string b = blue_action_csv(traces[e]);
    // Skip each per-episode header line and prefix rows with the episode.
    for (std::size_t pos = t.find('\n') + 1; pos < t.size();) {
      const auto end = t.find('\n', pos);
      traj += std::to_string(e) + "," + t.substr(pos, end - pos + 1);
      pos = end + 1;
    }
    for (std::size_t pos = b.find('\n') + 1; pos < b.size();) {
      const auto end = b.find('\n', pos);
      blue_log += std::to_string(e) + "," + b.substr(pos, end - pos + 1);
      pos = end + 1;
    }
  }
  write_file(out_dir / "trajectories.csv", traj);
  write_file(out_dir / "blue_actions.csv", blue_log);

  CellSummary cell = summarize(fx.blue_persona, fx.red_persona, seed, std::move(records),
                               opts.steps);
  write_file(out_dir / "ccdf.dat",
             ccdf_plot_data(ccdf(first_impacts(cell.records), opts.steps)));
  json summary = cell_json(cell);
  summary["eval_base_seed"] = opts.base_seed;
  summary["greedy"] = opts.greedy;
  summary["checkpoint"] = checkpoint.string();
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  return cell;
}

std::vector<FixtureAssertion> check_shipped_fixtures(const std::filesystem::path& data_dir) {
  struct Row {
    const char* action;
    double immediate, recurring;
  };
  struct Table {
    const char* agent;
    const char* persona;
    std::vector<Row> rows;
  };
  static const std::vector<Table> tables = {
      {"blue", "baseline", {{"nothing", 0.0, 0.0}, {"decoy0", -20.0, 0.0}, {"remove_decoy", -1.0, 0.0}}},
      {"blue", "proactive_v1", {{"nothing", -5.0, -1.0}, {"decoy0", 20.0, 2.0}, {"remove_decoy", -10.0, -2.0}}},
      {"blue", "proactive_v2", {{"nothing", -5.0, -1.0}, {"decoy0", -5.0, -0.5}, {"remove_decoy", -10.0, 0.0}}},
      {"red", "baseline",
       {{"pingsweep", 1, 0}, {"portscan", 2, 0}, {"discovery", 5, 0},
        {"lateral-movement", 10, 0}, {"privilege-escalation", 20, 0}, {"impact", 50, 0}}},
      {"red", "aggressive",
       {{"pingsweep", 5, 2}, {"portscan", 10, 3}, {"discovery", 20, 5},
        {"lateral-movement", 40, 15}, {"privilege-escalation", 75, 25}, {"impact", 150, 50}}},
      {"red", "stealthy",
       {{"pingsweep", 0.5, 3}, {"portscan", 1, 5}, {"discovery", 3, 8},
        {"lateral-movement", 5, 20}, {"privilege-escalation", 8, 25}, {"impact", 15, 50}}},
  };
  std::vector<FixtureAssertion> out;
  for (const auto& t : tables) {
    const auto rs = RewardStructure::load(
        read_file(data_dir / "rewards" / t.agent / (std::string(t.persona) + ".yaml")));
    for (const auto& row : t.rows) {
      const RewardEntry& e = rs.entry(row.action);
      out.push_back({t.agent, t.persona, row.action, "immediate", row.immediate, e.immediate});
      out.push_back({t.agent, t.persona, row.action, "recurring", row.recurring, e.recurring});
    }
  }
  return out;
}

const PublishedReference& published_reference() {
  static const PublishedReference ref{
      {{"baseline", {{"baseline", 15}, {"proactive_v1", 11}, {"proactive_v2", 11}}},
       {"stealthy", {{"baseline", 13}, {"proactive_v1", 13}, {"proactive_v2", 18}}},
       {"aggressive", {{"baseline", 10}, {"proactive_v1", 12}, {"proactive_v2", 15}}}},
      {{"aggressive", {{"proactive_v1", 0.395}, {"proactive_v2", 0.224}}},
       {"stealthy", {{"proactive_v1", 0.351}, {"proactive_v2", 0.342}}}}};
  return ref;
}

MatrixReport run_matrix(const RunConfig& cfg, const ProgressFn& progress) {
  struct Job {
    std::string blue, red;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& b : cfg.matrix_blue) {
    for (const auto& r : cfg.matrix_red) {
      for (std::uint64_t s : cfg.seeds) jobs.push_back({b, r, s});
    }
  }
  std::vector<CellSummary> cells(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::mutex progress_mu;
  auto report = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard lock(progress_mu);
    progress(msg);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        const auto dir = cfg.output_dir / "cells" /
                         (persona_label(job.blue) + "__" + persona_label(job.red)) /
                         ("seed_" + std::to_string(job.seed));
        const auto checkpoint = dir / "policy.json";
        PpoConfig ppo = cfg.ppo;
        ppo.seed = job.seed;
        const bool reuse = cfg.reuse_checkpoints &&
                           reusable(checkpoint, load_fixture_set(cfg, job.blue, job.red), ppo);
        if (reuse) {
          report(fmt::format("reusing {} vs {} seed {}", job.blue, job.red, job.seed));
        } else {
          report(fmt::format("training {} vs {} seed {}", job.blue, job.red, job.seed));
          train_run(cfg, job.blue, job.red, job.seed, dir);
        }
        cells[i] = evaluate_run(cfg, checkpoint, job.blue, job.red, job.seed, dir / "eval");
        report(fmt::format("done {} vs {} seed {}: exceedance_95={}", job.blue, job.red,
                           job.seed, cells[i].exceedance_95));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  MatrixReport out;
  json matrix{{"cells", json::array()}, {"comparison", json::object()},
              {"mixed_strategy", json::object()}, {"published_reference", json::object()}};
  for (const auto& c : cells) matrix["cells"].push_back(cell_json(c));

  for (const auto& r : cfg.matrix_red) {
    const std::string red = persona_label(r);
    double best = -1.0;
    std::string best_blue;
    for (const auto& b : cfg.matrix_blue) {
      const std::string blue = persona_label(b);
      std::vector<double> per_seed, decoy_pre;
      for (const auto& c : cells) {
        if (c.blue == blue && c.red == red) {
          per_seed.push_back(c.exceedance_95);
          const auto it = c.blue_freq_pre_impact.find("decoy0");
          decoy_pre.push_back(it == c.blue_freq_pre_impact.end() ? 0.0 : it->second);
        }
      }
      const double med = median(per_seed);
      matrix["comparison"][red][blue] = {
          {"exceedance_95_per_seed", per_seed},
          {"exceedance_95_median", med},
          {"exceedance_95_min", *std::min_element(per_seed.begin(), per_seed.end())},
          {"exceedance_95_max", *std::max_element(per_seed.begin(), per_seed.end())},
          {"decoy_fraction_pre_impact_per_seed", decoy_pre}};
      if (med > best) {
        best = med;
        best_blue = blue;
      }
    }
    out.mixed_strategy[red] = best_blue;
    matrix["mixed_strategy"][red] = best_blue;
  }
  const auto& ref = published_reference();
  matrix["published_reference"] = {{"exceedance_95", ref.exceedance_95},
                                   {"decoy_fraction_pre_impact", ref.decoy_fraction}};

  std::filesystem::create_directories(cfg.output_dir);
  out.json_path = cfg.output_dir / "matrix.json";
  write_file(out.json_path, matrix.dump(2) + "\n");
  out.cells = std::move(cells);
  return out;
}

}  // namespace decoysim
