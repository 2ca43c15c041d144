#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "decoysim/mlp.hpp"
#include "decoysim/ppo.hpp"

namespace decoysim {

struct FixtureHashes {
  std::string network;
  std::string blue_rewards;
  std::string red_rewards;

  bool operator==(const FixtureHashes&) const = default;
};

struct CheckpointMetadata {
  std::string blue_persona;
  std::string red_persona;
  PpoConfig config;
  FixtureHashes fixtures;
  std::int64_t global_steps = 0;
  double decoy_hit_multiplier = 1.0;
  int max_steps = 100;
};

struct Checkpoint {
  ActorCritic net;
  CheckpointMetadata meta;
};

// Writes `<stem>.json` (metadata) and `<stem>.f32` (little-endian float32
// parameters) where stem is `path` without extension. Returns the json path.
std::filesystem::path save_checkpoint(const std::filesystem::path& path,
                                      const ActorCritic& net,
                                      const CheckpointMetadata& meta);

// Accepts either file of the pair. Throws Error{kChecksumMismatch} when the
// parameter file does not match the hash recorded in the metadata.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws Error{kChecksumMismatch} naming the first differing fixture.
void verify_fixtures(const CheckpointMetadata& meta, const FixtureHashes& actual);

}  // namespace decoysim
