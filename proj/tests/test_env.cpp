#include <doctest.h>

#include "decoysim/env.hpp"
#include "decoysim/error.hpp"
#include "oracles.hpp"

using namespace decoysim;

namespace {

struct Logged {
  std::vector<double> rewards;
  std::vector<oracle::RewardEvent> events;
  std::vector<StepLog> logs;
};

Logged play(DefenseEnv& env, std::uint64_t seed, int steps, Rng& blue) {
  Logged out;
  env.reset(seed);
  for (int t = 0; t < steps; ++t) {
    const Transition tr = env.step(blue.below(env.action_count()));
    const StepLog& log = env.last_step();
    out.rewards.push_back(tr.reward);
    out.events.push_back({std::string(log.blue_action.base_name()),
                          std::string(to_string(log.red.action)), log.target_was_decoy});
    out.logs.push_back(log);
  }
  return out;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("sizes for the shipped network") {
  DefenseEnv env(oracle::env_config("baseline", "baseline"));
  CHECK(env.observation_size() == 42);
  CHECK(env.action_count() == 7);
  CHECK(env.reset(1).size() == 42);
}

TEST_CASE("episodes end at max_steps") {
  DefenseEnv env(oracle::env_config("baseline", "baseline", 10));
  env.reset(3);
  for (int t = 1; t <= 10; ++t) {
    const Transition tr = env.step(0);
    CHECK(tr.done == (t == 10));
    CHECK(tr.observation.size() == 42);
  }
}

TEST_CASE("same seed and actions reproduce the episode") {
  DefenseEnv a(oracle::env_config("proactive_v2", "stealthy"));
  DefenseEnv b(oracle::env_config("proactive_v2", "stealthy"));
  Rng ra(9), rb(9);
  const Logged la = play(a, 77, 100, ra);
  const Logged lb = play(b, 77, 100, rb);
  CHECK(la.rewards == lb.rewards);
  for (std::size_t t = 0; t < la.logs.size(); ++t) CHECK(la.logs[t].red == lb.logs[t].red);
}

TEST_CASE("environment rewards match the oracle on logged episodes") {
  const char* blues[] = {"baseline", "proactive_v1", "proactive_v2"};
  const char* reds[] = {"baseline", "aggressive", "stealthy"};
  Rng rng(5);
  for (const char* b : blues) {
    for (const char* r : reds) {
      const EnvConfig cfg = oracle::env_config(b, r);
      DefenseEnv env(cfg);
      for (std::uint64_t ep = 0; ep < 10; ++ep) {
        const Logged l = play(env, ep, 50, rng);
        const auto want = oracle::composite_rewards(l.events, oracle::table(cfg.blue_rewards),
                                                    oracle::table(cfg.red_rewards), 1.0);
        for (std::size_t t = 0; t < want.size(); ++t) CHECK(l.rewards[t] == want[t]);
      }
    }
  }
}

TEST_CASE("a no-op removal is still charged") {
  const EnvConfig cfg = oracle::env_config("proactive_v2", "baseline");
  DefenseEnv env(cfg);
  env.reset(4);
  const Transition tr = env.step(6);  // remove from subnet 2: nothing there
  CHECK(env.last_step().blue_status == BlueOutcome::Status::kNoop);
  const double red = cfg.red_rewards.entry(to_string(env.last_step().red.action)).immediate;
  CHECK(tr.reward == -10.0 - red);
}

TEST_CASE("a decoy in the entry subnet is seen by the first sweep") {
  DefenseEnv env(oracle::env_config("proactive_v1", "baseline"));
  // Deploying first means the sweep at step 1 lists the decoy.
  env.reset(12);
  const SubnetId home = env.state().host(env.red_knowledge().current_position).subnet;
  const Transition tr = env.step(1 + home.value);
  const StepLog& log = env.last_step();
  CHECK(log.red.action == RedAction::kPingsweep);
  REQUIRE(log.alert.has_value());
  CHECK(log.target_was_decoy);
  CHECK(tr.reward == 20.0 + 1.0);
  const std::size_t slot = 15 + home.value * 2;
  CHECK(tr.observation[slot] == 1.0);
  CHECK(tr.observation[21 + slot] == 1.0);
}

TEST_CASE("removing a decoy clears its observation slot") {
  DefenseEnv env(oracle::env_config("proactive_v1", "baseline"));
  env.reset(12);
  const SubnetId home = env.state().host(env.red_knowledge().current_position).subnet;
  env.step(1 + home.value);
  const std::size_t slot = 15 + home.value * 2;
  REQUIRE(env.observation().alert_history[slot] == 1);
  const Transition tr = env.step(4 + home.value);
  CHECK(env.last_step().blue_status == BlueOutcome::Status::kOk);
  CHECK(tr.observation[21 + slot] == 0.0);
}

TEST_CASE("reward structures must match their agent") {
  EnvConfig cfg = oracle::env_config("baseline", "baseline");
  std::swap(cfg.blue_rewards, cfg.red_rewards);
  CHECK_THROWS_AS(DefenseEnv{cfg}, Error);
}

}  // TEST_SUITE
