#include <doctest.h>

#include <cmath>

#include "decoysim/error.hpp"
#include "decoysim/rewards.hpp"
#include "decoysim/rng.hpp"
#include "oracles.hpp"

using namespace decoysim;

namespace {

std::vector<std::string> schema_diagnostics(const std::string& yaml) {
  try {
    RewardStructure::load(yaml);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
    CHECK(e.qualified_code() == "rewards.SchemaError");
    return e.diagnostics();
  }
  FAIL("expected SchemaError");
  return {};
}

bool mentions(const std::vector<std::string>& diags, const std::string& what) {
  for (const auto& d : diags) {
    if (d.find(what) != std::string::npos) return true;
  }
  return false;
}

const char* kBlueHead = "agent: blue\npersona: t\nactions:\n";

std::vector<oracle::RewardEvent> random_episode(Rng& rng, int steps) {
  static const char* blue[] = {"nothing", "decoy0", "remove_decoy"};
  std::vector<oracle::RewardEvent> ev;
  for (int t = 0; t < steps; ++t) {
    ev.push_back({blue[rng.below(3)], std::string(to_string(kRedActions[rng.below(6)])),
                  rng.below(4) == 0});
  }
  return ev;
}

std::vector<double> library_rewards(const std::vector<oracle::RewardEvent>& ev,
                                    const RewardStructure& b, const RewardStructure& r,
                                    RewardOptions opts = {}) {
  RecurringLedger ledger;
  std::vector<double> out;
  for (std::size_t t = 0; t < ev.size(); ++t) {
    out.push_back(step_reward(ev[t].blue, *parse_red_action(ev[t].red), ev[t].decoy, b, r,
                              ledger, static_cast<int>(t), opts));
  }
  return out;
}

}  // namespace

TEST_SUITE("rewards") {

TEST_CASE("shipped fixtures load with the documented values") {
  const auto red = oracle::persona("red", "baseline");
  CHECK(red.agent() == AgentKind::kRed);
  CHECK(red.entry("impact") == RewardEntry{"impact", 50, 0});
  CHECK(oracle::persona("red", "aggressive").entry("impact") == RewardEntry{"impact", 150, 50});
  CHECK(oracle::persona("blue", "proactive_v1").entry("decoy0") ==
        RewardEntry{"decoy0", 20, 2});
  CHECK(oracle::persona("blue", "proactive_v2").entry("decoy0") ==
        RewardEntry{"decoy0", -5, -0.5});
  CHECK_THROWS_AS(red.entry("exfiltrate"), Error);
}

TEST_CASE("schema violations are listed together") {
  const auto d = schema_diagnostics(std::string(kBlueHead) +
                                    "  - {name: nothing, immediate_reward: 0, recurring_reward: 0}\n"
                                    "  - {name: decoy0, immediate_reward: abc, recurring_reward: 0}\n"
                                    "  - {name: decoy1, immediate_reward: 1, recurring_reward: 0}\n");
  CHECK(mentions(d, "missing action 'remove_decoy'"));
  CHECK(mentions(d, "non-numeric 'immediate_reward'"));
  CHECK(mentions(d, "unexpected action 'decoy1'"));

  CHECK(mentions(schema_diagnostics(std::string(kBlueHead) +
                                    "  - {name: nothing, immediate_reward: 0, recurring_reward: 0}\n"
                                    "  - {name: nothing, immediate_reward: 0, recurring_reward: 0}\n"),
                 "duplicate action 'nothing'"));
  CHECK(mentions(schema_diagnostics("persona: x\nactions: []\n"), "missing 'agent'"));
  CHECK(mentions(schema_diagnostics(std::string(kBlueHead) +
                                    "  - {name: nothing, immediate_reward: .inf, recurring_reward: 0}\n"),
                 "non-finite"));
  CHECK_THROWS_AS(RewardStructure::load("agent: [unclosed"), Error);
}

TEST_CASE("to_yaml round-trips") {
  for (const char* p : {"baseline", "aggressive", "stealthy"}) {
    const auto rs = oracle::persona("red", p);
    CHECK(RewardStructure::load(rs.to_yaml()) == rs);
  }
}

TEST_CASE("hand-traced composite rewards") {
  const auto blue0 = oracle::persona("blue", "baseline");
  const auto red0 = oracle::persona("red", "baseline");
  RecurringLedger ledger;
  CHECK(step_reward("nothing", RedAction::kImpact, false, blue0, red0, ledger, 0) == -50.0);

  RecurringLedger l2;
  CHECK(step_reward("decoy0", RedAction::kPortscan, true, oracle::persona("blue", "proactive_v1"),
                    red0, l2, 0) == 22.0);

  // Stealthy red, proactive-v2 blue over two steps.
  const auto v2 = oracle::persona("blue", "proactive_v2");
  const auto stealthy = oracle::persona("red", "stealthy");
  RecurringLedger l3;
  // t=0 blue action carries no recurring charge, so only red's 3 persists.
  const double r0 = step_reward("remove_decoy", RedAction::kPingsweep, false, v2, stealthy, l3, 0);
  CHECK(r0 == -10.0 - 0.5);
  const double r1 = step_reward("nothing", RedAction::kPortscan, false, v2, stealthy, l3, 1);
  CHECK(r1 == -9.0);
  CHECK(l3.entries().size() == 4);
  CHECK(l3.total() == -3.0 - 1.0 - 5.0);
}

TEST_CASE("all-zero tables give zero forever") {
  std::vector<RewardEntry> b, r;
  for (const auto& n : required_actions(AgentKind::kBlue)) b.push_back({n, 0, 0});
  for (const auto& n : required_actions(AgentKind::kRed)) r.push_back({n, 0, 0});
  const RewardStructure zb(AgentKind::kBlue, "z", b), zr(AgentKind::kRed, "z", r);
  Rng rng(1);
  for (double v : library_rewards(random_episode(rng, 100), zb, zr)) CHECK(v == 0.0);
}

TEST_CASE("episode returns") {
  CHECK(episode_return(std::vector<double>{1, 1, 1}, 1.0) == 3.0);
  CHECK(episode_return(std::vector<double>{1, 0, 0}, 0.99) == 1.0);
  CHECK(episode_return(std::vector<double>{0, 1}, 0.99) == doctest::Approx(0.99));
}

TEST_CASE("composite reward matches the quadratic oracle") {
  Rng rng(2024);
  const char* blues[] = {"baseline", "proactive_v1", "proactive_v2"};
  const char* reds[] = {"baseline", "aggressive", "stealthy"};
  for (int ep = 0; ep < 200; ++ep) {
    const auto b = oracle::persona("blue", blues[rng.below(3)]);
    const auto r = oracle::persona("red", reds[rng.below(3)]);
    const double m = ep % 2 ? 1.0 : 2.5;
    const auto ev = random_episode(rng, 50);
    const auto got = library_rewards(ev, b, r, RewardOptions{m});
    const auto want = oracle::composite_rewards(ev, oracle::table(b), oracle::table(r), m);
    for (std::size_t t = 0; t < ev.size(); ++t) {
      CHECK(std::abs(got[t] - want[t]) <= 1e-12 * std::max(std::abs(got[t]), std::abs(want[t])));
    }
  }
}

TEST_CASE("scaling both tables scales every reward") {
  Rng rng(7);
  const auto b = oracle::persona("blue", "proactive_v1");
  const auto r = oracle::persona("red", "stealthy");
  for (double c : {0.5, 3.0, -2.0, 1e-3}) {
    const auto ev = random_episode(rng, 80);
    const auto base = library_rewards(ev, b, r);
    const auto scaled = library_rewards(ev, b.scaled(c), r.scaled(c));
    for (std::size_t t = 0; t < ev.size(); ++t) {
      CHECK(std::abs(scaled[t] - c * base[t]) <= 1e-12 * std::abs(c * base[t]) + 1e-300);
    }
  }
}

TEST_CASE("flipping the decoy flag flips only red terms") {
  const auto b = oracle::persona("blue", "proactive_v2");
  const auto r = oracle::persona("red", "aggressive");
  for (RedAction a : kRedActions) {
    for (const char* blue : {"nothing", "decoy0", "remove_decoy"}) {
      RecurringLedger real, decoy;
      const double on_real = step_reward(blue, a, false, b, r, real, 0);
      const double on_decoy = step_reward(blue, a, true, b, r, decoy, 0);
      const double blue_part = b.entry(blue).immediate;
      CHECK(on_real - blue_part == doctest::Approx(-(on_decoy - blue_part)));
      CHECK(real.entries()[0].amount == decoy.entries()[0].amount);
      CHECK(real.entries()[1].amount == -decoy.entries()[1].amount);
    }
  }
}

TEST_CASE("ledger grows by two entries a step and its total is the running sum") {
  Rng rng(11);
  const auto b = oracle::persona("blue", "proactive_v1");
  const auto r = oracle::persona("red", "aggressive");
  RecurringLedger ledger;
  for (int t = 0; t < 60; ++t) {
    step_reward("decoy0", kRedActions[rng.below(6)], rng.below(2) == 0, b, r, ledger, t);
    CHECK(ledger.entries().size() == static_cast<std::size_t>(2 * (t + 1)));
    double sum = 0.0;
    for (const auto& e : ledger.entries()) sum += e.amount;
    CHECK(ledger.total() == doctest::Approx(sum).epsilon(1e-12));
  }
}

}  // TEST_SUITE
