#include <doctest.h>

#include "decoysim/blueteam.hpp"
#include "decoysim/env.hpp"
#include "decoysim/error.hpp"
#include "decoysim/hashing.hpp"
#include "oracles.hpp"

using namespace decoysim;

namespace {

NetworkState fifteen() {
  return NetworkState::load(read_file(oracle::data_dir() / "networks/15-host.yaml"));
}

RedStep hit(RedAction a, RedTarget target) {
  RedStep s;
  s.action = a;
  s.target = target;
  return s;
}

}  // namespace

TEST_SUITE("blueteam") {

TEST_CASE("flattened action indices") {
  CHECK(blue_action_count(3) == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(BlueAction::from_index(i, 3).index(3) == i);
  }
  CHECK(BlueAction::from_index(0, 3).base_name() == "nothing");
  const BlueAction d = BlueAction::from_index(2, 3);
  CHECK(d.kind == BlueAction::Kind::kDeployDecoy);
  CHECK(d.subnet == SubnetId{1});
  CHECK(d.base_name() == "decoy0");
  const BlueAction r = BlueAction::from_index(6, 3);
  CHECK(r.kind == BlueAction::Kind::kRemoveDecoy);
  CHECK(r.subnet == SubnetId{2});
  CHECK(r.base_name() == "remove_decoy");
}

TEST_CASE("apply outcomes") {
  NetworkState net = fifteen();
  const NetworkState fresh = net;
  CHECK(apply_blue_action(BlueAction::from_index(0, 3), net).status == BlueOutcome::Status::kOk);
  CHECK(net == fresh);
  const auto dep = apply_blue_action(BlueAction::from_index(2, 3), net);
  CHECK(dep.status == BlueOutcome::Status::kOk);
  REQUIRE(dep.deployed.has_value());
  CHECK(net.host(*dep.deployed).is_decoy);
  CHECK(apply_blue_action(BlueAction::from_index(6, 3), net).status ==
        BlueOutcome::Status::kNoop);
  apply_blue_action(BlueAction::from_index(2, 3), net);
  CHECK(apply_blue_action(BlueAction::from_index(2, 3), net).status ==
        BlueOutcome::Status::kNoop);
}

TEST_CASE("detector fires only on decoys") {
  NetworkState net = fifteen();
  const HostId decoy = *net.deploy_decoy("user_subnet0", "decoy0").host;
  const auto a = detect(hit(RedAction::kPortscan, decoy), net, 4);
  REQUIRE(a.has_value());
  CHECK(*a == Alert{4, decoy, RedAction::kPortscan});
  CHECK_FALSE(detect(hit(RedAction::kLateralMovement, HostId{2}), net, 4).has_value());
  const auto sweep = detect(hit(RedAction::kPingsweep, SubnetId{0}), net, 5);
  REQUIRE(sweep.has_value());
  CHECK(sweep->target_host == decoy);
  CHECK_FALSE(detect(hit(RedAction::kPingsweep, SubnetId{1}), net, 5).has_value());

  // With two decoys the sweep is attributed to slot 0.
  net.deploy_decoy("user_subnet0", "decoy0");
  CHECK(detect(hit(RedAction::kPingsweep, SubnetId{0}), net, 6)->target_host == decoy);
}

TEST_CASE("observation layout and sticky history") {
  NetworkState net = fifteen();
  CHECK(observation_slot_count(net) == 21);
  const HostId d0 = *net.deploy_decoy("user_subnet1", "decoy0").host;
  const HostId d1 = *net.deploy_decoy("user_subnet1", "decoy0").host;
  const SlotMap map = SlotMap::from_state(net);
  CHECK(map.length() == 21);
  CHECK(map.slot_of(HostId{3}) == 3u);
  CHECK(map.slot_of(d0) == 15u + 2u);
  CHECK(map.slot_of(d1) == 15u + 3u);

  Observation obs = Observation::empty(21);
  CHECK(obs.flatten() == std::vector<double>(42, 0.0));

  const std::vector<Alert> twice = {{1, d1, RedAction::kPortscan}, {1, d1, RedAction::kDiscovery}};
  const std::vector<Alert> once = {{1, d1, RedAction::kPortscan}};
  CHECK(build_observation(twice, obs, map) == build_observation(once, obs, map));

  obs = build_observation(once, obs, map);
  CHECK(obs.current_alerts[18] == 1);
  CHECK(obs.alert_history[18] == 1);
  obs = build_observation({}, obs, map);
  CHECK(obs.current_alerts[18] == 0);
  CHECK(obs.alert_history[18] == 1);
  clear_slot(obs, 18);
  CHECK(obs.alert_history[18] == 0);
}

TEST_CASE("alert on an unmapped host is a bookkeeping error") {
  NetworkState net = fifteen();
  const SlotMap map = SlotMap::from_state(net);
  const std::vector<Alert> bad = {{1, HostId{400}, RedAction::kImpact}};
  try {
    build_observation(bad, Observation::empty(21), map);
    FAIL("expected UnmappedHost");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnmappedHost);
  }
}

TEST_CASE("detector is sound and complete on logged episodes") {
  DefenseEnv env(oracle::env_config("proactive_v1", "baseline"));
  Rng rng(17);
  for (std::uint64_t ep = 0; ep < 30; ++ep) {
    env.reset(ep);
    Observation prev = env.observation();
    for (int t = 0; t < 100; ++t) {
      env.step(rng.below(env.action_count()));
      const StepLog& log = env.last_step();
      CHECK(log.alert.has_value() == log.target_was_decoy);
      const Observation& obs = env.observation();
      CHECK(obs.slots() == 21);
      // History only grows, except for a slot freed by this step's removal.
      for (std::size_t i = 0; i < obs.slots(); ++i) {
        if (prev.alert_history[i] && !obs.alert_history[i]) {
          CHECK(log.blue_action.kind == BlueAction::Kind::kRemoveDecoy);
          CHECK(i >= 15);
        }
      }
      prev = obs;
    }
  }
}

}  // TEST_SUITE
