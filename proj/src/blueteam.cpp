#include "decoysim/blueteam.hpp"

#include "decoysim/error.hpp"

namespace decoysim {

BlueAction BlueAction::from_index(std::size_t index, std::size_t subnet_count) {
  if (index >= blue_action_count(subnet_count)) {
    throw Error(ErrorCode::kInvalidArgument, "blueteam",
                "blue action index " + std::to_string(index) + " out of range");
  }
  if (index == 0) return {};
  if (index <= subnet_count) {
    return {Kind::kDeployDecoy, SubnetId{static_cast<std::uint32_t>(index - 1)}};
  }
  return {Kind::kRemoveDecoy,
          SubnetId{static_cast<std::uint32_t>(index - 1 - subnet_count)}};
}

std::size_t BlueAction::index(std::size_t subnet_count) const {
  switch (kind) {
    case Kind::kNothing: return 0;
    case Kind::kDeployDecoy: return 1 + subnet.value;
    case Kind::kRemoveDecoy: return 1 + subnet_count + subnet.value;
  }
  return 0;
}

std::string_view BlueAction::base_name() const {
  switch (kind) {
    case Kind::kNothing: return "nothing";
    case Kind::kDeployDecoy: return "decoy0";
    case Kind::kRemoveDecoy: return "remove_decoy";
  }
  return "nothing";
}

BlueOutcome apply_blue_action(const BlueAction& action, NetworkState& state) {
  BlueOutcome out;
  switch (action.kind) {
    case BlueAction::Kind::kNothing:
      break;
    case BlueAction::Kind::kDeployDecoy: {
      const auto r = state.deploy_decoy(action.subnet, kDefaultDecoyType);
      if (r.status == DeployOutcome::Status::kDeployed) {
        out.deployed = r.host;
      } else {
        out.status = BlueOutcome::Status::kNoop;
      }
      break;
    }
    case BlueAction::Kind::kRemoveDecoy: {
      const auto r = state.remove_decoy(action.subnet);
      if (r.status == RemoveOutcome::Status::kRemoved) {
        out.removed = r.host;
      } else {
        out.status = BlueOutcome::Status::kNoop;
      }
      break;
    }
  }
  return out;
}

std::optional<Alert> detect(const RedStep& step, const NetworkState& state,
                            int step_index) {
  if (const auto* subnet = std::get_if<SubnetId>(&step.target)) {
    for (HostId h : state.hosts_in(*subnet)) {
      if (state.host(h).is_decoy) return Alert{step_index, h, step.action};
    }
    return std::nullopt;
  }
  const HostId host = std::get<HostId>(step.target);
  if (state.host(host).is_decoy) return Alert{step_index, host, step.action};
  return std::nullopt;
}

SlotMap SlotMap::from_state(const NetworkState& state) {
  SlotMap map;
  map.length_ = observation_slot_count(state);
  map.slots_.assign(state.host_table_size(), std::nullopt);
  for (std::size_t i = 0; i < state.config_host_count(); ++i) map.slots_[i] = i;
  const std::size_t base = state.config_host_count();
  for (std::size_t s = 0; s < state.subnet_count(); ++s) {
    const auto decoys = state.decoys_in(SubnetId{static_cast<std::uint32_t>(s)});
    for (std::size_t k = 0; k < decoys.size(); ++k) {
      map.slots_[decoys[k].value] = base + s * state.decoy_capacity() + k;
    }
  }
  return map;
}

std::optional<std::size_t> SlotMap::slot_of(HostId host) const {
  if (host.value >= slots_.size()) return std::nullopt;
  return slots_[host.value];
}

Observation Observation::empty(std::size_t slots) {
  return {std::vector<std::uint8_t>(slots, 0),
          std::vector<std::uint8_t>(slots, 0)};
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(current_alerts.size() * 2);
  for (auto b : current_alerts) out.push_back(b ? 1.0 : 0.0);
  for (auto b : alert_history) out.push_back(b ? 1.0 : 0.0);
  return out;
}

Observation build_observation(std::span<const Alert> alerts,
                              const Observation& previous,
                              const SlotMap& slot_map) {
  Observation next = previous;
  std::fill(next.current_alerts.begin(), next.current_alerts.end(), 0);
  for (const Alert& a : alerts) {
    const auto slot = slot_map.slot_of(a.target_host);
    if (!slot || *slot >= next.current_alerts.size()) {
      throw Error(ErrorCode::kUnmappedHost, "blueteam",
                  "alert on host " + std::to_string(a.target_host.value) +
                      " has no observation slot");
    }
    next.current_alerts[*slot] = 1;
  }
  for (std::size_t i = 0; i < next.alert_history.size(); ++i) {
    next.alert_history[i] = next.alert_history[i] | next.current_alerts[i];
  }
  return next;
}

void clear_slot(Observation& obs, std::size_t slot) {
  obs.current_alerts.at(slot) = 0;
  obs.alert_history.at(slot) = 0;
}

}  // namespace decoysim
