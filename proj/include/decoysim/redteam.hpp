#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "decoysim/rng.hpp"
#include "decoysim/topology.hpp"

namespace decoysim {

// Kill-chain phases in the order the heuristic prefers them.
enum class RedAction {
  kPingsweep,
  kPortscan,
  kDiscovery,
  kLateralMovement,
  kPrivilegeEscalation,
  kImpact,
};

inline constexpr std::array<RedAction, 6> kRedActions = {
    RedAction::kPingsweep,       RedAction::kPortscan,
    RedAction::kDiscovery,       RedAction::kLateralMovement,
    RedAction::kPrivilegeEscalation, RedAction::kImpact};

// Names as they appear in red reward configs.
std::string_view to_string(RedAction action);
std::optional<RedAction> parse_red_action(std::string_view name);

// What the attacker knows. Holds host ids and subnet ids only; nothing here
// (or in HostId) says whether a host is a decoy.
struct RedKnowledge {
  std::set<SubnetId> known_subnets;
  std::set<SubnetId> swept_subnets;
  std::set<HostId> known_hosts;
  std::map<HostId, std::vector<int>> scanned_hosts;
  std::set<HostId> discovered_hosts;
  std::set<HostId> footholds;
  std::set<HostId> escalated;
  std::set<HostId> impacted;
  HostId current_position;

  bool operator==(const RedKnowledge&) const = default;
};

using RedTarget = std::variant<HostId, SubnetId>;

struct RedStep {
  RedAction action = RedAction::kPingsweep;
  HostId source_host;
  RedTarget target;
  bool success = true;

  bool operator==(const RedStep&) const = default;
};

// Picks a uniformly random real host as the entry foothold. Throws
// Error{kEmptyNetwork} when there is none.
RedKnowledge red_reset(NetworkState& state, Rng& rng);
RedKnowledge red_reset(NetworkState& state, std::uint64_t seed);

// One heuristic attacker step: the earliest kill-chain phase that has an
// eligible target wins, ties among targets broken uniformly with `rng`.
// Applies the effect to both the knowledge and the host runtime state.
RedStep red_step(RedKnowledge& knowledge, NetworkState& state, Rng& rng);

// Candidates for one phase, in ascending id order. Exposed for tests.
std::vector<RedTarget> eligible_targets(const RedKnowledge& knowledge,
                                        const NetworkState& state,
                                        RedAction phase);

// 1-based index of the first successful impact, if any.
std::optional<int> first_impact_step(std::span<const RedStep> trajectory);

}  // namespace decoysim
