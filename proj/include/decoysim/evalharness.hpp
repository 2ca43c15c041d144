#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decoysim/checkpoint.hpp"
#include "decoysim/env.hpp"
#include "decoysim/mlp.hpp"
#include "decoysim/rng.hpp"

namespace decoysim {

class BluePolicy {
 public:
  virtual ~BluePolicy() = default;
  // step is 1-based within the episode.
  virtual std::size_t act(std::span<const double> obs, int step, Rng& rng) = 0;
};

class NetworkPolicy : public BluePolicy {
 public:
  NetworkPolicy(ActorCritic net, bool greedy) : net_(std::move(net)), greedy_(greedy) {}
  std::size_t act(std::span<const double> obs, int step, Rng& rng) override;

 private:
  ActorCritic net_;
  bool greedy_;
};

class UniformRandomPolicy : public BluePolicy {
 public:
  explicit UniformRandomPolicy(std::size_t action_count) : actions_(action_count) {}
  std::size_t act(std::span<const double>, int, Rng& rng) override {
    return static_cast<std::size_t>(rng.below(actions_));
  }

 private:
  std::size_t actions_;
};

class ScriptedPolicy : public BluePolicy {
 public:
  using Script = std::function<std::size_t(int step, std::span<const double> obs)>;
  explicit ScriptedPolicy(Script script) : script_(std::move(script)) {}
  std::size_t act(std::span<const double> obs, int step, Rng&) override {
    return script_(step, obs);
  }

 private:
  Script script_;
};

using ActionCounts = std::map<std::string, int, std::less<>>;

struct EpisodeRecord {
  std::uint64_t seed = 0;
  int steps = 0;
  std::optional<int> first_impact_step;
  ActionCounts blue_action_counts;
  ActionCounts blue_action_counts_pre_impact;
  ActionCounts red_action_counts;
  ActionCounts red_action_counts_pre_impact;
  double total_reward = 0.0;

  // Steps strictly before the first impact (all steps when none).
  int pre_impact_steps() const;
  bool operator==(const EpisodeRecord&) const = default;
};

struct EvalOptions {
  int episodes = 50;
  int steps = 100;
  std::uint64_t base_seed = 0;
  bool greedy = false;
};

// Episode i runs with environment seed base_seed + i; the policy draws from
// an independent stream derived from that seed.
std::vector<EpisodeRecord> evaluate(BluePolicy& policy, const EnvConfig& env,
                                    const EvalOptions& options,
                                    std::vector<std::vector<StepLog>>* traces = nullptr);

// Loads a checkpoint, verifies it was trained on the given fixtures
// (Error{kChecksumMismatch} otherwise) and evaluates it.
std::vector<EpisodeRecord> evaluate_checkpoint(
    const std::filesystem::path& checkpoint, const EnvConfig& env,
    const FixtureHashes& fixtures, const EvalOptions& options,
    std::vector<std::vector<StepLog>>* traces = nullptr);

// --- time to first impact ------------------------------------------------------

enum class CensorMode { kInclude, kExclude };

// Empirical P(X > x). Censored samples (no impact within the episode) count
// as exceeding every x when included.
class Ccdf {
 public:
  std::size_t sample_count() const { return n_; }
  std::size_t censored_count() const { return censored_; }
  int censored_at() const { return censored_at_; }
  const std::vector<int>& finite_samples() const { return sorted_; }

  double exceedance(int x) const;
  std::size_t count_exceeding(int x) const;
  // (x_i, P(X > x_i)) over distinct finite sample values, ascending x.
  std::vector<std::pair<int, double>> points() const;

 private:
  friend Ccdf ccdf(std::span<const std::optional<int>>, int, CensorMode);
  std::vector<int> sorted_;
  std::size_t censored_ = 0;
  std::size_t n_ = 0;
  int censored_at_ = 0;
};

// Throws Error{kEmptySamples} when nothing is left to count.
Ccdf ccdf(std::span<const std::optional<int>> samples, int censored_at,
          CensorMode mode = CensorMode::kInclude);

// Largest x in [0, censored_at] with P(X > x) >= p; 0 if none.
int exceedance_percentile(const Ccdf& dist, double p = 0.95);

// The (1-p) lower order statistic x_(ceil((1-p) n)); censored samples
// report as censored_at. Differs from exceedance_percentile by one on
// degenerate integer data.
int order_statistic_percentile(const Ccdf& dist, double p = 0.95);

std::vector<std::optional<int>> first_impacts(std::span<const EpisodeRecord> records);

// Aggregate count / aggregate step denominator across records.
std::map<std::string, double> blue_action_frequencies(
    std::span<const EpisodeRecord> records, bool pre_impact);
std::map<std::string, double> red_action_frequencies(
    std::span<const EpisodeRecord> records, bool pre_impact);

// --- output formats --------------------------------------------------------------

std::string episodes_csv(std::span<const EpisodeRecord> records);
std::string trajectory_csv(std::span<const StepLog> trace);
std::string blue_action_csv(std::span<const StepLog> trace);
// "x p" lines for external plotting.
std::string ccdf_plot_data(const Ccdf& dist);

}  // namespace decoysim
