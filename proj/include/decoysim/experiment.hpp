#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "decoysim/checkpoint.hpp"
#include "decoysim/env.hpp"
#include "decoysim/evalharness.hpp"
#include "decoysim/ppo.hpp"
#include "decoysim/run_config.hpp"

namespace decoysim {

// Parsed fixtures for one (blue, red) pairing plus their content hashes.
struct FixtureSet {
  EnvConfig env;
  FixtureHashes hashes;
  std::string blue_persona;
  std::string red_persona;
};

FixtureSet load_fixture_set(const RunConfig& cfg, const std::string& blue,
                            const std::string& red);

std::string metrics_csv_header();
std::string metrics_csv_row(const UpdateMetrics& m);

struct TrainOutput {
  std::filesystem::path checkpoint;
  std::filesystem::path metrics_csv;
  std::vector<UpdateMetrics> metrics;
};

// Trains one blue policy and writes metrics.csv, policy.json and policy.f32
// into out_dir.
TrainOutput train_run(const RunConfig& cfg, const std::string& blue,
                      const std::string& red, std::uint64_t seed,
                      const std::filesystem::path& out_dir,
                      const std::function<void(const UpdateMetrics&)>& on_update = {});

struct CellSummary {
  std::string blue;
  std::string red;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;
  int exceedance_95 = 0;
  int exceedance_95_excluding_censored = 0;
  int order_statistic_95 = 0;
  std::size_t censored = 0;
  std::vector<std::pair<int, double>> ccdf_points;
  std::map<std::string, double> blue_freq;
  std::map<std::string, double> blue_freq_pre_impact;
  std::map<std::string, double> red_freq;
  double mean_total_reward = 0.0;
};

CellSummary summarize(std::string blue, std::string red, std::uint64_t seed,
                      std::vector<EpisodeRecord> records, int censored_at);

// Evaluates a checkpoint and writes episodes.csv, trajectories.csv,
// blue_actions.csv, ccdf.dat and summary.json into out_dir.
CellSummary evaluate_run(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                         const std::string& blue, const std::string& red,
                         std::uint64_t seed, const std::filesystem::path& out_dir);

struct MatrixReport {
  std::vector<CellSummary> cells;
  // red persona -> blue persona with the highest median exceedance.
  std::map<std::string, std::string> mixed_strategy;
  std::filesystem::path json_path;
};

using ProgressFn = std::function<void(const std::string&)>;

// Trains (or reuses) and evaluates every blue x red x seed cell, writing
// per-cell outputs under out_dir/cells and out_dir/matrix.json.
MatrixReport run_matrix(const RunConfig& cfg, const ProgressFn& progress = {});

// One expected table value checked against a shipped reward fixture.
struct FixtureAssertion {
  std::string agent;    // "blue" / "red"
  std::string persona;
  std::string action;
  std::string field;    // "immediate" / "recurring"
  double expected = 0.0;
  double actual = 0.0;
  bool passed() const { return expected == actual; }
};

// Loads the six shipped persona files under data_dir/rewards and compares
// all 54 values (18 blue, 36 red) with the reference tables. Load failures propagate.
std::vector<FixtureAssertion> check_shipped_fixtures(const std::filesystem::path& data_dir);

// Reference values from the published single-run experiment, reported next
// to ours (never asserted).
struct PublishedReference {
  std::map<std::string, std::map<std::string, int>> exceedance_95;  // red -> blue -> steps
  std::map<std::string, std::map<std::string, double>> decoy_fraction;  // red -> blue
};
const PublishedReference& published_reference();

}  // namespace decoysim
