#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decoysim/blueteam.hpp"
#include "decoysim/redteam.hpp"
#include "decoysim/rewards.hpp"
#include "decoysim/rng.hpp"
#include "decoysim/topology.hpp"

namespace decoysim {

struct Transition {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
};

// Minimal episodic interface the PPO trainer drives.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual Transition step(std::size_t action) = 0;
};

struct EnvConfig {
  NetworkConfig network;
  RewardStructure blue_rewards;
  RewardStructure red_rewards;
  int max_steps = 100;
  RewardOptions reward_options;
};

// Everything that happened in one environment step; the source of the
// trajectory and blue action logs.
struct StepLog {
  int step = 0;  // 1-based
  BlueAction blue_action;
  BlueOutcome::Status blue_status = BlueOutcome::Status::kOk;
  RedStep red;
  std::string source_subnet;
  std::string destination_subnet;
  bool target_was_decoy = false;
  std::optional<Alert> alert;
  double reward = 0.0;
};

// Blue-vs-red episode loop. Within a step the blue action is applied first,
// then the red agent acts, the detector runs and the composite reward is
// computed.
class DefenseEnv : public Environment {
 public:
  explicit DefenseEnv(EnvConfig config);

  std::size_t observation_size() const override { return 2 * slots_; }
  std::size_t action_count() const override;
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(std::size_t action) override;

  const NetworkState& state() const { return state_; }
  const RedKnowledge& red_knowledge() const { return red_; }
  const Observation& observation() const { return obs_; }
  const RecurringLedger& ledger() const { return ledger_; }
  const StepLog& last_step() const { return last_; }
  int steps_taken() const { return t_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  NetworkState state_;
  std::size_t slots_;
  Rng red_rng_{0};
  RedKnowledge red_;
  Observation obs_;
  RecurringLedger ledger_;
  StepLog last_;
  int t_ = 0;
};

}  // namespace decoysim
