#include "decoysim/env.hpp"

#include "decoysim/error.hpp"

namespace decoysim {

DefenseEnv::DefenseEnv(EnvConfig config)
    : config_(std::move(config)),
      state_(config_.network),
      slots_(observation_slot_count(state_)) {
  if (config_.blue_rewards.agent() != AgentKind::kBlue ||
      config_.red_rewards.agent() != AgentKind::kRed) {
    throw Error(ErrorCode::kInvalidArgument, "env",
                "environment needs one blue and one red reward structure");
  }
  if (config_.max_steps <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "env", "max_steps must be positive");
  }
  obs_ = Observation::empty(slots_);
}

std::size_t DefenseEnv::action_count() const {
  return blue_action_count(state_.subnet_count());
}

std::vector<double> DefenseEnv::reset(std::uint64_t seed) {
  state_.reset();
  red_rng_ = Rng(seed);
  red_ = red_reset(state_, red_rng_);
  obs_ = Observation::empty(slots_);
  ledger_.clear();
  last_ = StepLog{};
  t_ = 0;
  return obs_.flatten();
}

Transition DefenseEnv::step(std::size_t action_index) {
  const BlueAction action =
      BlueAction::from_index(action_index, state_.subnet_count());
  const int step_index = t_;
  ++t_;

  const BlueOutcome outcome = apply_blue_action(action, state_);
  if (outcome.removed) {
    // The removed decoy's slot is the one just past the remaining prefix.
    const std::size_t slot =
        state_.config_host_count() +
        action.subnet.value * state_.decoy_capacity() +
        state_.decoys_in(action.subnet).size();
    clear_slot(obs_, slot);
  }

  const RedStep red = red_step(red_, state_, red_rng_);
  const std::optional<Alert> alert = detect(red, state_, t_);
  const SlotMap slots = SlotMap::from_state(state_);
  std::vector<Alert> alerts;
  if (alert) alerts.push_back(*alert);
  obs_ = build_observation(alerts, obs_, slots);

  bool target_is_decoy = false;
  std::string destination;
  if (const auto* host = std::get_if<HostId>(&red.target)) {
    target_is_decoy = state_.host(*host).is_decoy;
    destination = state_.subnet_name(state_.host(*host).subnet);
  } else {
    const SubnetId subnet = std::get<SubnetId>(red.target);
    target_is_decoy = alert.has_value();
    destination = state_.subnet_name(subnet);
  }

  const double reward =
      step_reward(action.base_name(), red.action, target_is_decoy,
                  config_.blue_rewards, config_.red_rewards, ledger_,
                  step_index, config_.reward_options);

  last_ = StepLog{};
  last_.step = t_;
  last_.blue_action = action;
  last_.blue_status = outcome.status;
  last_.red = red;
  last_.source_subnet =
      state_.subnet_name(state_.host(red.source_host).subnet);
  last_.destination_subnet = std::move(destination);
  last_.target_was_decoy = target_is_decoy;
  last_.alert = alert;
  last_.reward = reward;

  return Transition{obs_.flatten(), reward, t_ >= config_.max_steps};
}

}  // namespace decoysim
