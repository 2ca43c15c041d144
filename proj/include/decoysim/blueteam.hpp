#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "decoysim/redteam.hpp"
#include "decoysim/topology.hpp"

namespace decoysim {

// Flattened defender action space of size 1 + 2*S:
//   0             nothing
//   1 .. S        deploy decoy0 into subnet i-1
//   S+1 .. 2S     remove the newest decoy from subnet i-S-1
struct BlueAction {
  enum class Kind { kNothing, kDeployDecoy, kRemoveDecoy };

  Kind kind = Kind::kNothing;
  SubnetId subnet;

  static BlueAction from_index(std::size_t index, std::size_t subnet_count);
  std::size_t index(std::size_t subnet_count) const;
  // Reward-config name: "nothing", "decoy0" or "remove_decoy".
  std::string_view base_name() const;

  bool operator==(const BlueAction&) const = default;
};

inline std::size_t blue_action_count(std::size_t subnet_count) {
  return 1 + 2 * subnet_count;
}

inline constexpr std::string_view kDefaultDecoyType = "decoy0";

struct BlueOutcome {
  enum class Status { kOk, kNoop };
  Status status = Status::kOk;
  std::optional<HostId> deployed;
  std::optional<HostId> removed;
};

BlueOutcome apply_blue_action(const BlueAction& action, NetworkState& state);

struct Alert {
  int step = 0;
  HostId target_host;
  RedAction triggering_action = RedAction::kPingsweep;

  bool operator==(const Alert&) const = default;
};

// Fires iff the red step touched a decoy. A pingsweep fires when the swept
// subnet holds a decoy and is attributed to the lowest-indexed one.
std::optional<Alert> detect(const RedStep& step, const NetworkState& state,
                            int step_index);

// Host -> observation slot. Config-declared hosts own slots [0, H); the
// deployable decoy slots follow as H + subnet * capacity + slot.
class SlotMap {
 public:
  static SlotMap from_state(const NetworkState& state);

  std::size_t length() const { return length_; }
  std::optional<std::size_t> slot_of(HostId host) const;

 private:
  std::size_t length_ = 0;
  std::vector<std::optional<std::size_t>> slots_;
};

inline std::size_t observation_slot_count(const NetworkState& state) {
  return state.config_host_count() +
         state.subnet_count() * state.decoy_capacity();
}

struct Observation {
  std::vector<std::uint8_t> current_alerts;
  std::vector<std::uint8_t> alert_history;

  static Observation empty(std::size_t slots);
  std::size_t slots() const { return current_alerts.size(); }
  // [current..., history...] as network input.
  std::vector<double> flatten() const;

  bool operator==(const Observation&) const = default;
};

// Throws Error{kUnmappedHost} for an alert on a host without a slot.
Observation build_observation(std::span<const Alert> alerts,
                              const Observation& previous,
                              const SlotMap& slot_map);

// Forget a removed decoy's current and historical alerts.
void clear_slot(Observation& obs, std::size_t slot);

}  // namespace decoysim
