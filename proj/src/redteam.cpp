#include "decoysim/redteam.hpp"

#include "decoysim/error.hpp"

namespace decoysim {
namespace {

bool is_live(const NetworkState& state, HostId id) {
  return state.host(id).live;
}

}  // namespace

std::string_view to_string(RedAction action) {
  switch (action) {
    case RedAction::kPingsweep: return "pingsweep";
    case RedAction::kPortscan: return "portscan";
    case RedAction::kDiscovery: return "discovery";
    case RedAction::kLateralMovement: return "lateral-movement";
    case RedAction::kPrivilegeEscalation: return "privilege-escalation";
    case RedAction::kImpact: return "impact";
  }
  return "pingsweep";
}

std::optional<RedAction> parse_red_action(std::string_view name) {
  for (RedAction a : kRedActions) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

RedKnowledge red_reset(NetworkState& state, Rng& rng) {
  const std::vector<HostId> real = state.real_hosts();
  if (real.empty()) {
    throw Error(ErrorCode::kEmptyNetwork, "redteam",
                "network has no real host to enter through");
  }
  const HostId entry = real[rng.below(real.size())];
  state.host(entry).compromise = CompromiseLevel::kFoothold;

  RedKnowledge k;
  k.current_position = entry;
  k.known_hosts.insert(entry);
  k.footholds.insert(entry);
  k.known_subnets.insert(state.host(entry).subnet);
  return k;
}

RedKnowledge red_reset(NetworkState& state, std::uint64_t seed) {
  Rng rng(seed);
  return red_reset(state, rng);
}

std::vector<RedTarget> eligible_targets(const RedKnowledge& k,
                                        const NetworkState& state,
                                        RedAction phase) {
  std::vector<RedTarget> out;
  auto add_hosts = [&](const std::set<HostId>& from, auto&& pred) {
    for (HostId h : from) {
      if (is_live(state, h) && pred(h)) out.emplace_back(h);
    }
  };
  switch (phase) {
    case RedAction::kPingsweep:
      for (SubnetId s : k.known_subnets) {
        if (!k.swept_subnets.contains(s)) out.emplace_back(s);
      }
      break;
    case RedAction::kPortscan:
      add_hosts(k.known_hosts,
                [&](HostId h) { return !k.scanned_hosts.contains(h); });
      break;
    case RedAction::kDiscovery:
      for (const auto& [h, ports] : k.scanned_hosts) {
        if (is_live(state, h) && !k.discovered_hosts.contains(h)) {
          out.emplace_back(h);
        }
      }
      break;
    case RedAction::kLateralMovement:
      add_hosts(k.discovered_hosts,
                [&](HostId h) { return !k.footholds.contains(h); });
      break;
    case RedAction::kPrivilegeEscalation:
      add_hosts(k.footholds, [&](HostId h) { return !k.escalated.contains(h); });
      break;
    case RedAction::kImpact:
      add_hosts(k.escalated, [](HostId) { return true; });
      break;
  }
  return out;
}

RedStep red_step(RedKnowledge& k, NetworkState& state, Rng& rng) {
  for (RedAction phase : kRedActions) {
    std::vector<RedTarget> candidates = eligible_targets(k, state, phase);
    if (candidates.empty()) continue;
    const RedTarget target = candidates[rng.below(candidates.size())];

    RedStep step;
    step.action = phase;
    step.source_host = k.current_position;
    step.target = target;
    step.success = true;

    if (phase == RedAction::kPingsweep) {
      const SubnetId subnet = std::get<SubnetId>(target);
      k.swept_subnets.insert(subnet);
      for (HostId h : state.hosts_in(subnet)) k.known_hosts.insert(h);
      return step;
    }

    const HostId host = std::get<HostId>(target);
    HostRuntime& rt = state.host(host);
    switch (phase) {
      case RedAction::kPortscan:
        k.scanned_hosts[host] = rt.spec.services;
        break;
      case RedAction::kDiscovery:
        k.discovered_hosts.insert(host);
        for (std::size_t s = 0; s < state.subnet_count(); ++s) {
          k.known_subnets.insert(SubnetId{static_cast<std::uint32_t>(s)});
        }
        break;
      case RedAction::kLateralMovement:
        k.footholds.insert(host);
        k.current_position = host;
        if (rt.compromise == CompromiseLevel::kUntouched) {
          rt.compromise = CompromiseLevel::kFoothold;
        }
        break;
      case RedAction::kPrivilegeEscalation:
        k.escalated.insert(host);
        rt.compromise = CompromiseLevel::kEscalated;
        break;
      case RedAction::kImpact:
        k.impacted.insert(host);
        rt.impacted = true;
        break;
      case RedAction::kPingsweep:
        break;
    }
    return step;
  }
  // Unreachable: the entry foothold is always eligible for escalation or
  // impact, and removed hosts never include the entry (it is real).
  throw Error(ErrorCode::kEmptyNetwork, "redteam", "red agent has no action");
}

std::optional<int> first_impact_step(std::span<const RedStep> trajectory) {
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory[i].action == RedAction::kImpact && trajectory[i].success) {
      return static_cast<int>(i) + 1;
    }
  }
  return std::nullopt;
}

}  // namespace decoysim
