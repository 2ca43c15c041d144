#include "decoysim/evalharness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "decoysim/error.hpp"
#include "decoysim/ppo.hpp"

namespace decoysim {
namespace {

ActionCounts zero_blue_counts() {
  return {{"nothing", 0}, {"decoy0", 0}, {"remove_decoy", 0}};
}

ActionCounts zero_red_counts() {
  ActionCounts out;
  for (RedAction a : kRedActions) out.emplace(std::string(to_string(a)), 0);
  return out;
}

std::map<std::string, double> frequencies(std::span<const EpisodeRecord> records,
                                          bool pre_impact, bool blue) {
  std::map<std::string, double> out;
  double denominator = 0.0;
  for (const auto& r : records) {
    const ActionCounts& counts =
        blue ? (pre_impact ? r.blue_action_counts_pre_impact : r.blue_action_counts)
             : (pre_impact ? r.red_action_counts_pre_impact : r.red_action_counts);
    for (const auto& [name, c] : counts) out[name] += c;
    denominator += pre_impact ? r.pre_impact_steps() : r.steps;
  }
  for (auto& [name, v] : out) v = denominator > 0 ? v / denominator : 0.0;
  return out;
}

}  // namespace

std::size_t NetworkPolicy::act(std::span<const double> obs, int, Rng& rng) {
  const Vector logits = net_.logits(obs);
  if (greedy_) {
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    return static_cast<std::size_t>(best);
  }
  return sample_categorical(logits, rng).action;
}

int EpisodeRecord::pre_impact_steps() const {
  return first_impact_step ? *first_impact_step - 1 : steps;
}

std::vector<EpisodeRecord> evaluate(BluePolicy& policy, const EnvConfig& env_cfg,
                                    const EvalOptions& options,
                                    std::vector<std::vector<StepLog>>* traces) {
  if (options.episodes <= 0 || options.steps <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "evalharness",
                "episodes and steps must be positive");
  }
  EnvConfig cfg = env_cfg;
  cfg.max_steps = options.steps;
  DefenseEnv env(cfg);
  std::vector<EpisodeRecord> records;
  if (traces) traces->clear();

  for (int i = 0; i < options.episodes; ++i) {
    EpisodeRecord rec;
    rec.seed = options.base_seed + static_cast<std::uint64_t>(i);
    rec.blue_action_counts = zero_blue_counts();
    rec.blue_action_counts_pre_impact = zero_blue_counts();
    rec.red_action_counts = zero_red_counts();
    rec.red_action_counts_pre_impact = zero_red_counts();
    Rng policy_rng(derive_seed(rec.seed, SeedStream::kEvaluation));
    std::vector<double> obs = env.reset(rec.seed);
    std::vector<StepLog> trace;

    bool done = false;
    while (!done) {
      const int step = env.steps_taken() + 1;
      const std::size_t action = policy.act(obs, step, policy_rng);
      Transition tr = env.step(action);
      const StepLog& log = env.last_step();
      const std::string blue_name(log.blue_action.base_name());
      const std::string red_name(to_string(log.red.action));
      ++rec.blue_action_counts[blue_name];
      ++rec.red_action_counts[red_name];
      if (!rec.first_impact_step && log.red.action == RedAction::kImpact &&
          log.red.success) {
        rec.first_impact_step = log.step;
      }
      if (!rec.first_impact_step) {
        ++rec.blue_action_counts_pre_impact[blue_name];
        ++rec.red_action_counts_pre_impact[red_name];
      }
      rec.total_reward += tr.reward;
      ++rec.steps;
      if (traces) trace.push_back(log);
      obs = std::move(tr.observation);
      done = tr.done;
    }
    records.push_back(std::move(rec));
    if (traces) traces->push_back(std::move(trace));
  }
  return records;
}

std::vector<EpisodeRecord> evaluate_checkpoint(
    const std::filesystem::path& checkpoint, const EnvConfig& env,
    const FixtureHashes& fixtures, const EvalOptions& options,
    std::vector<std::vector<StepLog>>* traces) {
  Checkpoint cp = load_checkpoint(checkpoint);
  verify_fixtures(cp.meta, fixtures);
  NetworkPolicy policy(std::move(cp.net), options.greedy);
  return evaluate(policy, env, options, traces);
}

// --- CCDF ---------------------------------------------------------------------------

Ccdf ccdf(std::span<const std::optional<int>> samples, int censored_at,
          CensorMode mode) {
  Ccdf out;
  out.censored_at_ = censored_at;
  for (const auto& s : samples) {
    if (s) {
      out.sorted_.push_back(*s);
    } else if (mode == CensorMode::kInclude) {
      ++out.censored_;
    }
  }
  std::sort(out.sorted_.begin(), out.sorted_.end());
  out.n_ = out.sorted_.size() + out.censored_;
  if (out.n_ == 0) {
    throw Error(ErrorCode::kEmptySamples, "evalharness", "no samples for CCDF");
  }
  return out;
}

std::size_t Ccdf::count_exceeding(int x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<std::size_t>(sorted_.end() - it) + censored_;
}

double Ccdf::exceedance(int x) const {
  return static_cast<double>(count_exceeding(x)) / static_cast<double>(n_);
}

std::vector<std::pair<int, double>> Ccdf::points() const {
  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i > 0 && sorted_[i] == sorted_[i - 1]) continue;
    out.emplace_back(sorted_[i], exceedance(sorted_[i]));
  }
  return out;
}

int exceedance_percentile(const Ccdf& dist, double p) {
  // Compare counts, not ratios, so p*n on the boundary is exact.
  const double needed = p * static_cast<double>(dist.sample_count());
  for (int x = dist.censored_at(); x >= 0; --x) {
    if (static_cast<double>(dist.count_exceeding(x)) >= needed - 1e-9) return x;
  }
  return 0;
}

int order_statistic_percentile(const Ccdf& dist, double p) {
  const auto n = static_cast<double>(dist.sample_count());
  auto k = static_cast<std::size_t>(std::ceil((1.0 - p) * n - 1e-9));
  k = std::max<std::size_t>(k, 1);
  const auto& finite = dist.finite_samples();
  if (k <= finite.size()) return finite[k - 1];
  return dist.censored_at();
}

std::vector<std::optional<int>> first_impacts(std::span<const EpisodeRecord> records) {
  std::vector<std::optional<int>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.first_impact_step);
  return out;
}

std::map<std::string, double> blue_action_frequencies(
    std::span<const EpisodeRecord> records, bool pre_impact) {
  return frequencies(records, pre_impact, true);
}

std::map<std::string, double> red_action_frequencies(
    std::span<const EpisodeRecord> records, bool pre_impact) {
  return frequencies(records, pre_impact, false);
}

// --- output formats ------------------------------------------------------------------

std::string episodes_csv(std::span<const EpisodeRecord> records) {
  std::string out =
      "seed,steps,first_impact_step,total_reward,blue_nothing,blue_decoy0,"
      "blue_remove_decoy,pre_impact_blue_nothing,pre_impact_blue_decoy0,"
      "pre_impact_blue_remove_decoy";
  for (RedAction a : kRedActions) out += fmt::format(",red_{}", to_string(a));
  out += "\n";
  for (const auto& r : records) {
    out += fmt::format(
        "{},{},{},{:.9g},{},{},{},{},{},{}", r.seed, r.steps,
        r.first_impact_step ? std::to_string(*r.first_impact_step) : "",
        r.total_reward, r.blue_action_counts.at("nothing"),
        r.blue_action_counts.at("decoy0"), r.blue_action_counts.at("remove_decoy"),
        r.blue_action_counts_pre_impact.at("nothing"),
        r.blue_action_counts_pre_impact.at("decoy0"),
        r.blue_action_counts_pre_impact.at("remove_decoy"));
    for (RedAction a : kRedActions) {
      out += fmt::format(",{}", r.red_action_counts.find(to_string(a))->second);
    }
    out += "\n";
  }
  return out;
}

std::string trajectory_csv(std::span<const StepLog> trace) {
  std::string out = "step,action,source_subnet,destination_subnet,target_was_decoy\n";
  for (const auto& s : trace) {
    out += fmt::format("{},{},{},{},{}\n", s.step, to_string(s.red.action),
                       s.source_subnet, s.destination_subnet,
                       s.target_was_decoy ? 1 : 0);
  }
  return out;
}

std::string blue_action_csv(std::span<const StepLog> trace) {
  std::string out = "step,action_name,subnet,outcome\n";
  for (const auto& s : trace) {
    const bool has_subnet = s.blue_action.kind != BlueAction::Kind::kNothing;
    out += fmt::format("{},{},{},{}\n", s.step, s.blue_action.base_name(),
                       has_subnet ? std::to_string(s.blue_action.subnet.value) : "",
                       s.blue_status == BlueOutcome::Status::kOk ? "ok" : "noop");
  }
  return out;
}

std::string ccdf_plot_data(const Ccdf& dist) {
  std::string out = "# x P(X>x)\n";
  for (int x = 0; x <= dist.censored_at(); ++x) {
    out += fmt::format("{} {:.6f}\n", x, dist.exceedance(x));
  }
  return out;
}

}  // namespace decoysim
