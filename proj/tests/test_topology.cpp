#include <doctest.h>

#include <algorithm>
#include <set>

#include "decoysim/error.hpp"
#include "decoysim/hashing.hpp"
#include "decoysim/redteam.hpp"
#include "decoysim/rng.hpp"
#include "decoysim/topology.hpp"
#include "oracles.hpp"

using namespace decoysim;

namespace {

NetworkState fifteen() {
  return NetworkState::load(read_file(oracle::data_dir() / "networks/15-host.yaml"));
}

ErrorCode code_of(const std::string& yaml) {
  try {
    NetworkState::load(yaml);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

const char* kSingleton = R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts: [{name: h, type: workstation, subnet: s, services: [22]}]
)";

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("shipped network has three subnets of five hosts") {
  const NetworkState net = fifteen();
  CHECK(net.subnet_count() == 3);
  CHECK(net.config_host_count() == 15);
  CHECK(net.real_host_count() == 15);
  CHECK(net.decoy_capacity() == 2);
  for (std::uint32_t s = 0; s < 3; ++s) {
    CHECK(net.hosts_in(SubnetId{s}).size() == 5);
    CHECK(net.decoys_in(SubnetId{s}).empty());
  }
  for (HostId h : net.real_hosts()) {
    CHECK(net.host(h).compromise == CompromiseLevel::kUntouched);
    CHECK_FALSE(net.host(h).impacted);
  }
}

TEST_CASE("singleton network is valid") {
  const NetworkState net = NetworkState::load(kSingleton);
  CHECK(net.real_host_count() == 1);
  CHECK(net.subnet_count() == 1);
}

TEST_CASE("malformed and dangling configs are rejected") {
  CHECK(code_of("routers: [") == ErrorCode::kParse);
  CHECK(code_of(R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts: [{name: h, type: workstation, subnet: dmz, services: [22]}]
)") == ErrorCode::kValidation);
  CHECK(code_of(R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts:
  - {name: h, type: workstation, subnet: s, services: [22]}
  - {name: h, type: workstation, subnet: s, services: [22]}
)") == ErrorCode::kValidation);
  CHECK(code_of(R"(
routers: [{name: r}]
subnets: [{name: s, router: nowhere}]
hosts: []
)") == ErrorCode::kValidation);
  CHECK(code_of(R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts: [{name: m, type: mail_server, subnet: s, services: []}]
)") == ErrorCode::kValidation);
  CHECK(code_of(R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts: [{name: h, type: workstation, subnet: s, services: [70000]}]
)") == ErrorCode::kValidation);
}

TEST_CASE("deploy fills slots up to capacity then saturates") {
  NetworkState net = fifteen();
  const auto a = net.deploy_decoy("user_subnet1", "decoy0");
  REQUIRE(a.status == DeployOutcome::Status::kDeployed);
  CHECK(net.hosts_in(SubnetId{1}).size() == 6);
  CHECK(net.host(*a.host).is_decoy);
  CHECK(net.host(*a.host).spec.subnet == "user_subnet1");
  const auto b = net.deploy_decoy("user_subnet1", "decoy0");
  REQUIRE(b.status == DeployOutcome::Status::kDeployed);
  CHECK(b.host->value != a.host->value);

  const NetworkState before = net;
  const auto c = net.deploy_decoy("user_subnet1", "decoy0");
  CHECK(c.status == DeployOutcome::Status::kAtCapacity);
  CHECK(net == before);
  CHECK(net.real_host_count() == 15);
}

TEST_CASE("remove is LIFO and a no-op on an empty subnet") {
  NetworkState net = fifteen();
  const NetworkState before = net;
  CHECK(net.remove_decoy("user_subnet2").status == RemoveOutcome::Status::kNonePresent);
  CHECK(net == before);

  const HostId first = *net.deploy_decoy("user_subnet2", "decoy0").host;
  const HostId second = *net.deploy_decoy("user_subnet2", "decoy0").host;
  const auto removed = net.remove_decoy("user_subnet2");
  REQUIRE(removed.status == RemoveOutcome::Status::kRemoved);
  CHECK(*removed.host == second);
  CHECK_FALSE(net.host(second).live);
  REQUIRE(net.decoys_in(SubnetId{2}).size() == 1);
  CHECK(net.decoys_in(SubnetId{2})[0] == first);
  const auto hosts = net.hosts_in(SubnetId{2});
  CHECK(std::find(hosts.begin(), hosts.end(), second) == hosts.end());
}

TEST_CASE("unknown subnets are reported") {
  NetworkState net = fifteen();
  CHECK_THROWS_AS(net.deploy_decoy("dmz", "decoy0"), Error);
  CHECK_THROWS_AS(net.remove_decoy(SubnetId{7}), Error);
  try {
    net.deploy_decoy("dmz", "decoy0");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownSubnet);
  }
}

TEST_CASE("serialize round-trips a fresh network") {
  const NetworkState net = fifteen();
  const NetworkState again = NetworkState::load(net.serialize());
  CHECK(again == net);
  CHECK(NetworkConfig::parse(net.config().to_yaml()) == net.config());
}

TEST_CASE("random deploy/remove sequences keep the invariants") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    NetworkState net = fifteen();
    std::vector<std::vector<HostId>> model(3);
    std::set<std::uint32_t> seen_ids;
    for (int step = 0; step < 60; ++step) {
      const auto s = static_cast<std::uint32_t>(rng.below(3));
      if (rng.below(2) == 0) {
        const auto out = net.deploy_decoy(SubnetId{s}, "decoy0");
        if (model[s].size() < 2) {
          REQUIRE(out.status == DeployOutcome::Status::kDeployed);
          CHECK(seen_ids.insert(out.host->value).second);  // never reused
          model[s].push_back(*out.host);
        } else {
          CHECK(out.status == DeployOutcome::Status::kAtCapacity);
        }
      } else {
        const auto out = net.remove_decoy(SubnetId{s});
        if (model[s].empty()) {
          CHECK(out.status == RemoveOutcome::Status::kNonePresent);
        } else {
          CHECK(*out.host == model[s].back());
          model[s].pop_back();
        }
      }
      CHECK(net.real_host_count() == 15);
      for (std::uint32_t k = 0; k < 3; ++k) {
        const auto d = net.decoys_in(SubnetId{k});
        CHECK(std::vector<HostId>(d.begin(), d.end()) == model[k]);
        CHECK(net.hosts_in(SubnetId{k}).size() == 5 + model[k].size());
      }
    }
    net.reset();
    CHECK(net == fifteen());
  }
}

TEST_CASE("red knowledge of a decoy and a real host look the same") {
  // A static decoy with the same services as a workstation: after a sweep
  // and scan the attacker's records for both are indistinguishable.
  const char* yaml = R"(
routers: [{name: r}]
subnets: [{name: s, router: r}]
hosts:
  - {name: real, type: workstation, subnet: s, services: [22, 80]}
  - {name: fake, type: decoy, subnet: s, services: [22, 80]}
)";
  NetworkState net = NetworkState::load(yaml);
  Rng rng(1);
  RedKnowledge k = red_reset(net, rng);
  CHECK(k.current_position == HostId{0});  // decoys are never an entry point
  for (int i = 0; i < 3; ++i) red_step(k, net, rng);
  REQUIRE(k.scanned_hosts.contains(HostId{0}));
  REQUIRE(k.scanned_hosts.contains(HostId{1}));
  CHECK(k.scanned_hosts.at(HostId{0}) == k.scanned_hosts.at(HostId{1}));
  CHECK(k.known_hosts.contains(HostId{1}));
}

}  // TEST_SUITE
