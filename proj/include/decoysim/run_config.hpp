#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decoysim/ppo.hpp"
#include "decoysim/rewards.hpp"

namespace decoysim {

// Everything a CLI run needs. Loaded from a YAML file whose keys mirror the
// field names below, then overridden key by key from flags.
struct RunConfig {
  std::filesystem::path data_dir = DECOYSIM_DEFAULT_DATA_DIR;
  // Paths may be absolute, relative to the working directory or relative to
  // data_dir. Personas may also be bare names ("proactive_v1").
  std::string network = "networks/15-host.yaml";
  std::string blue = "baseline";
  std::string red = "baseline";
  std::vector<std::string> matrix_blue = {"baseline", "proactive_v1", "proactive_v2"};
  std::vector<std::string> matrix_red = {"baseline", "stealthy", "aggressive"};
  // Seeds for the matrix; single runs use ppo.seed.
  std::vector<std::uint64_t> seeds = {1};
  std::filesystem::path output_dir = "runs/default";

  PpoConfig ppo;
  int max_steps = 100;
  double decoy_hit_multiplier = 1.0;

  int eval_episodes = 50;
  int eval_steps = 100;
  bool greedy = false;
  // Defaults to a value derived from the run seed.
  std::optional<std::uint64_t> eval_base_seed;

  bool reuse_checkpoints = true;
  int threads = 0;  // 0 = hardware concurrency

  // Throws Error{kParse} / Error{kInvalidArgument}.
  static RunConfig from_yaml(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  // Applies one "key=value" style override. Unknown keys are rejected.
  void set(std::string_view key, std::string_view value);
  std::string to_yaml() const;

  std::uint64_t seed() const { return ppo.seed; }
  std::uint64_t evaluation_seed(std::uint64_t seed) const;

  std::filesystem::path resolve_network() const;
  std::filesystem::path resolve_persona(AgentKind agent, const std::string& name) const;
  // Fails with Error{kInvalidArgument} naming the first missing input.
  void check_paths() const;
};

std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Persona label for a fixture reference ("proactive_v1" for a bare name or
// the file stem for a path).
std::string persona_label(const std::string& ref);

}  // namespace decoysim
