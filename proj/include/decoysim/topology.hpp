#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace decoysim {

struct HostId {
  std::uint32_t value = 0;
  auto operator<=>(const HostId&) const = default;
};

struct SubnetId {
  std::uint32_t value = 0;
  auto operator<=>(const SubnetId&) const = default;
};

enum class HostType { kWorkstation, kMailServer, kFileServer, kDecoy };

std::string_view to_string(HostType type);
std::optional<HostType> parse_host_type(std::string_view name);

struct HostSpec {
  std::string name;
  HostType type = HostType::kWorkstation;
  std::string subnet;
  std::vector<int> services;

  bool operator==(const HostSpec&) const = default;
};

struct SubnetSpec {
  std::string name;
  std::string router;
  bool operator==(const SubnetSpec&) const = default;
};

// Routes and firewall entries are carried through load/serialize but do not
// restrict connectivity: every subnet can reach every other one.
struct RouterSpec {
  std::string name;
  std::vector<std::string> routes;
  std::vector<std::string> firewall;
  bool operator==(const RouterSpec&) const = default;
};

struct DecoyTypeSpec {
  std::string name;
  std::vector<int> services;
  bool operator==(const DecoyTypeSpec&) const = default;
};

struct NetworkConfig {
  std::string name;
  std::vector<RouterSpec> routers;
  std::vector<SubnetSpec> subnets;
  std::vector<HostSpec> hosts;
  std::vector<DecoyTypeSpec> decoy_types;
  std::size_t decoy_capacity = 2;

  bool operator==(const NetworkConfig&) const = default;

  // Throws Error{kParse} or Error{kValidation}.
  static NetworkConfig parse(std::string_view yaml_text);
  std::string to_yaml() const;
};

enum class CompromiseLevel { kUntouched, kFoothold, kEscalated };

struct HostRuntime {
  HostSpec spec;
  SubnetId subnet;
  bool is_decoy = false;
  CompromiseLevel compromise = CompromiseLevel::kUntouched;
  bool impacted = false;
  // Removed decoys stay in the host table so ids are never reused.
  bool live = true;

  bool operator==(const HostRuntime&) const = default;
};

struct DeployOutcome {
  enum class Status { kDeployed, kAtCapacity };
  Status status = Status::kAtCapacity;
  std::optional<HostId> host;
};

struct RemoveOutcome {
  enum class Status { kRemoved, kNonePresent };
  Status status = Status::kNonePresent;
  std::optional<HostId> host;
};

// Ground truth of the simulated network. Hosts declared in the config occupy
// ids [0, config_host_count()); decoys deployed at runtime get fresh ids
// after that and are never reused within an episode.
class NetworkState {
 public:
  explicit NetworkState(NetworkConfig config);

  // load_network: parse + validate + build a fresh state.
  static NetworkState load(std::string_view yaml_text);

  const NetworkConfig& config() const { return config_; }
  std::string serialize() const { return config_.to_yaml(); }

  std::size_t subnet_count() const { return config_.subnets.size(); }
  const std::string& subnet_name(SubnetId id) const;
  std::optional<SubnetId> find_subnet(std::string_view name) const;
  std::size_t decoy_capacity() const { return config_.decoy_capacity; }

  // Hosts currently present in a subnet, real and decoy alike: config hosts
  // in declaration order, then deployed decoys in slot order.
  std::vector<HostId> hosts_in(SubnetId subnet) const;

  const HostRuntime& host(HostId id) const;
  HostRuntime& host(HostId id);
  std::size_t host_table_size() const { return hosts_.size(); }
  std::size_t config_host_count() const { return config_.hosts.size(); }

  // Live hosts that are not decoys (static or deployed).
  std::vector<HostId> real_hosts() const;
  std::size_t real_host_count() const { return real_host_count_; }

  // Deployed decoys of a subnet, slot 0 first. Slots fill lowest-first and
  // removal is LIFO, so occupied slots always form a prefix.
  std::span<const HostId> decoys_in(SubnetId subnet) const;
  bool has_live_decoy(SubnetId subnet) const;

  DeployOutcome deploy_decoy(SubnetId subnet, std::string_view decoy_type);
  DeployOutcome deploy_decoy(std::string_view subnet,
                             std::string_view decoy_type);
  RemoveOutcome remove_decoy(SubnetId subnet);
  RemoveOutcome remove_decoy(std::string_view subnet);

  // Back to the freshly loaded state (no decoys, every host untouched).
  void reset();

  bool operator==(const NetworkState&) const = default;

 private:
  void check_subnet(SubnetId subnet) const;
  SubnetId require_subnet(std::string_view name) const;

  NetworkConfig config_;
  std::vector<HostRuntime> hosts_;
  std::vector<std::vector<HostId>> subnet_hosts_;
  std::vector<std::vector<HostId>> decoy_slots_;
  std::size_t real_host_count_ = 0;
  std::uint32_t decoy_serial_ = 0;
};

}  // namespace decoysim
