#include "decoysim/topology.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>
#include <utility>

#include "decoysim/error.hpp"

namespace decoysim {
namespace {

constexpr const char* kModule = "topology";

[[noreturn]] void parse_fail(const std::string& msg) {
  throw Error(ErrorCode::kParse, kModule, msg);
}

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::kValidation, kModule, msg);
}

std::string require_string(const YAML::Node& node, const char* key,
                           const std::string& where) {
  const YAML::Node value = node[key];
  if (!value || !value.IsScalar()) {
    parse_fail(where + ": missing or non-scalar '" + key + "'");
  }
  return value.as<std::string>();
}

std::vector<std::string> optional_strings(const YAML::Node& node,
                                          const char* key,
                                          const std::string& where) {
  std::vector<std::string> out;
  const YAML::Node value = node[key];
  if (!value) return out;
  if (!value.IsSequence()) parse_fail(where + ": '" + key + "' must be a list");
  for (const auto& item : value) out.push_back(item.as<std::string>());
  return out;
}

std::vector<int> parse_ports(const YAML::Node& node, const std::string& where) {
  std::vector<int> ports;
  if (!node) return ports;
  if (!node.IsSequence()) parse_fail(where + ": services must be a list");
  for (const auto& item : node) {
    int port = 0;
    try {
      port = item.as<int>();
    } catch (const YAML::Exception&) {
      parse_fail(where + ": service port is not an integer");
    }
    if (port < 1 || port > 65535) {
      invalid(where + ": port " + std::to_string(port) + " out of range");
    }
    ports.push_back(port);
  }
  return ports;
}

YAML::Node require_list(const YAML::Node& node, const char* key) {
  const YAML::Node value = node[key];
  if (!value) {
    parse_fail(std::string("missing top-level key '") + key + "'");
  }
  if (!value.IsSequence()) parse_fail(std::string("'") + key + "' must be a list");
  return value;
}

void validate(const NetworkConfig& cfg) {
  std::set<std::string> routers;
  for (const auto& r : cfg.routers) {
    if (r.name.empty()) invalid("router with empty name");
    if (!routers.insert(r.name).second) invalid("duplicate router '" + r.name + "'");
  }
  if (cfg.subnets.empty()) invalid("network declares no subnets");
  std::set<std::string> subnets;
  for (const auto& s : cfg.subnets) {
    if (!subnets.insert(s.name).second) invalid("duplicate subnet '" + s.name + "'");
    if (!routers.contains(s.router)) {
      invalid("subnet '" + s.name + "' references undeclared router '" +
              s.router + "'");
    }
  }
  std::set<std::string> hosts;
  for (const auto& h : cfg.hosts) {
    if (h.name.empty()) invalid("host with empty name");
    if (!hosts.insert(h.name).second) invalid("duplicate host '" + h.name + "'");
    if (!subnets.contains(h.subnet)) {
      invalid("host '" + h.name + "' references undeclared subnet '" +
              h.subnet + "'");
    }
    const bool server =
        h.type == HostType::kMailServer || h.type == HostType::kFileServer;
    if (server && h.services.empty()) {
      invalid("server host '" + h.name + "' declares no services");
    }
  }
  std::set<std::string> decoy_types;
  for (const auto& d : cfg.decoy_types) {
    if (!decoy_types.insert(d.name).second) {
      invalid("duplicate decoy type '" + d.name + "'");
    }
  }
}

}  // namespace

std::string_view to_string(HostType type) {
  switch (type) {
    case HostType::kWorkstation: return "workstation";
    case HostType::kMailServer: return "mail_server";
    case HostType::kFileServer: return "file_server";
    case HostType::kDecoy: return "decoy";
  }
  return "workstation";
}

std::optional<HostType> parse_host_type(std::string_view name) {
  for (HostType t : {HostType::kWorkstation, HostType::kMailServer,
                     HostType::kFileServer, HostType::kDecoy}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

NetworkConfig NetworkConfig::parse(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    parse_fail(std::string("malformed network config: ") + e.what());
  }
  if (!root.IsMap()) parse_fail("network config must be a mapping");

  NetworkConfig cfg;
  try {
    if (root["name"]) cfg.name = root["name"].as<std::string>();

    for (const auto& node : require_list(root, "routers")) {
      RouterSpec r;
      r.name = require_string(node, "name", "router");
      r.routes = optional_strings(node, "routes", "router " + r.name);
      r.firewall = optional_strings(node, "firewall", "router " + r.name);
      cfg.routers.push_back(std::move(r));
    }
    for (const auto& node : require_list(root, "subnets")) {
      SubnetSpec s;
      s.name = require_string(node, "name", "subnet");
      s.router = require_string(node, "router", "subnet " + s.name);
      cfg.subnets.push_back(std::move(s));
    }
    for (const auto& node : require_list(root, "hosts")) {
      HostSpec h;
      h.name = require_string(node, "name", "host");
      const std::string type = require_string(node, "type", "host " + h.name);
      const auto parsed = parse_host_type(type);
      if (!parsed) parse_fail("host " + h.name + ": unknown type '" + type + "'");
      h.type = *parsed;
      h.subnet = require_string(node, "subnet", "host " + h.name);
      h.services = parse_ports(node["services"], "host " + h.name);
      cfg.hosts.push_back(std::move(h));
    }
    if (const YAML::Node decoys = root["decoys"]) {
      if (decoys["capacity_per_subnet"]) {
        const int cap = decoys["capacity_per_subnet"].as<int>();
        if (cap < 0) invalid("decoy capacity must be non-negative");
        cfg.decoy_capacity = static_cast<std::size_t>(cap);
      }
      if (const YAML::Node types = decoys["types"]) {
        if (!types.IsSequence()) parse_fail("decoys.types must be a list");
        for (const auto& node : types) {
          DecoyTypeSpec d;
          d.name = require_string(node, "name", "decoy type");
          d.services = parse_ports(node["services"], "decoy type " + d.name);
          cfg.decoy_types.push_back(std::move(d));
        }
      }
    }
  } catch (const YAML::Exception& e) {
    parse_fail(std::string("malformed network config: ") + e.what());
  }
  if (cfg.decoy_types.empty()) {
    cfg.decoy_types.push_back({"decoy0", {22, 80, 443}});
  }
  validate(cfg);
  return cfg;
}

std::string NetworkConfig::to_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << name;
  out << YAML::Key << "routers" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : routers) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << r.name;
    if (!r.routes.empty()) {
      out << YAML::Key << "routes" << YAML::Value << YAML::Flow << r.routes;
    }
    if (!r.firewall.empty()) {
      out << YAML::Key << "firewall" << YAML::Value << YAML::Flow << r.firewall;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "subnets" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : subnets) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name
        << YAML::Key << "router" << YAML::Value << s.router << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "hosts" << YAML::Value << YAML::BeginSeq;
  for (const auto& h : hosts) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << h.name
        << YAML::Key << "type" << YAML::Value << std::string(to_string(h.type))
        << YAML::Key << "subnet" << YAML::Value << h.subnet << YAML::Key
        << "services" << YAML::Value << YAML::Flow << h.services
        << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "decoys" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "capacity_per_subnet" << YAML::Value << decoy_capacity;
  out << YAML::Key << "types" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : decoy_types) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << d.name
        << YAML::Key << "services" << YAML::Value << YAML::Flow << d.services
        << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

NetworkState::NetworkState(NetworkConfig config) : config_(std::move(config)) {
  reset();
}

NetworkState NetworkState::load(std::string_view yaml_text) {
  return NetworkState(NetworkConfig::parse(yaml_text));
}

void NetworkState::reset() {
  hosts_.clear();
  subnet_hosts_.assign(config_.subnets.size(), {});
  decoy_slots_.assign(config_.subnets.size(), {});
  real_host_count_ = 0;
  decoy_serial_ = 0;
  for (const auto& spec : config_.hosts) {
    const SubnetId subnet = require_subnet(spec.subnet);
    HostRuntime rt;
    rt.spec = spec;
    rt.subnet = subnet;
    rt.is_decoy = spec.type == HostType::kDecoy;
    if (!rt.is_decoy) ++real_host_count_;
    const HostId id{static_cast<std::uint32_t>(hosts_.size())};
    hosts_.push_back(std::move(rt));
    subnet_hosts_[subnet.value].push_back(id);
  }
}

const std::string& NetworkState::subnet_name(SubnetId id) const {
  check_subnet(id);
  return config_.subnets[id.value].name;
}

std::optional<SubnetId> NetworkState::find_subnet(std::string_view name) const {
  for (std::size_t i = 0; i < config_.subnets.size(); ++i) {
    if (config_.subnets[i].name == name) {
      return SubnetId{static_cast<std::uint32_t>(i)};
    }
  }
  return std::nullopt;
}

void NetworkState::check_subnet(SubnetId subnet) const {
  if (subnet.value >= config_.subnets.size()) {
    throw Error(ErrorCode::kUnknownSubnet, kModule,
                "subnet index " + std::to_string(subnet.value) + " out of range");
  }
}

SubnetId NetworkState::require_subnet(std::string_view name) const {
  const auto id = find_subnet(name);
  if (!id) {
    throw Error(ErrorCode::kUnknownSubnet, kModule,
                "unknown subnet '" + std::string(name) + "'");
  }
  return *id;
}

std::vector<HostId> NetworkState::hosts_in(SubnetId subnet) const {
  check_subnet(subnet);
  std::vector<HostId> out = subnet_hosts_[subnet.value];
  const auto& decoys = decoy_slots_[subnet.value];
  out.insert(out.end(), decoys.begin(), decoys.end());
  return out;
}

const HostRuntime& NetworkState::host(HostId id) const {
  return hosts_.at(id.value);
}

HostRuntime& NetworkState::host(HostId id) { return hosts_.at(id.value); }

std::vector<HostId> NetworkState::real_hosts() const {
  std::vector<HostId> out;
  out.reserve(real_host_count_);
  for (std::size_t i = 0; i < config_.hosts.size(); ++i) {
    if (!hosts_[i].is_decoy) out.push_back(HostId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

std::span<const HostId> NetworkState::decoys_in(SubnetId subnet) const {
  check_subnet(subnet);
  return decoy_slots_[subnet.value];
}

bool NetworkState::has_live_decoy(SubnetId subnet) const {
  check_subnet(subnet);
  if (!decoy_slots_[subnet.value].empty()) return true;
  return std::any_of(subnet_hosts_[subnet.value].begin(),
                     subnet_hosts_[subnet.value].end(),
                     [&](HostId id) { return hosts_[id.value].is_decoy; });
}

DeployOutcome NetworkState::deploy_decoy(SubnetId subnet,
                                         std::string_view decoy_type) {
  check_subnet(subnet);
  auto& slots = decoy_slots_[subnet.value];
  if (slots.size() >= config_.decoy_capacity) return {};

  const auto type_it =
      std::find_if(config_.decoy_types.begin(), config_.decoy_types.end(),
                   [&](const DecoyTypeSpec& d) { return d.name == decoy_type; });
  if (type_it == config_.decoy_types.end()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "unknown decoy type '" + std::string(decoy_type) + "'");
  }

  HostRuntime rt;
  rt.spec.name = type_it->name + "-" + config_.subnets[subnet.value].name + "-" +
                 std::to_string(decoy_serial_++);
  rt.spec.type = HostType::kDecoy;
  rt.spec.subnet = config_.subnets[subnet.value].name;
  rt.spec.services = type_it->services;
  rt.subnet = subnet;
  rt.is_decoy = true;
  const HostId id{static_cast<std::uint32_t>(hosts_.size())};
  hosts_.push_back(std::move(rt));
  slots.push_back(id);
  return {DeployOutcome::Status::kDeployed, id};
}

DeployOutcome NetworkState::deploy_decoy(std::string_view subnet,
                                         std::string_view decoy_type) {
  return deploy_decoy(require_subnet(subnet), decoy_type);
}

RemoveOutcome NetworkState::remove_decoy(SubnetId subnet) {
  check_subnet(subnet);
  auto& slots = decoy_slots_[subnet.value];
  if (slots.empty()) return {};
  const HostId id = slots.back();
  slots.pop_back();
  hosts_[id.value].live = false;
  return {RemoveOutcome::Status::kRemoved, id};
}

RemoveOutcome NetworkState::remove_decoy(std::string_view subnet) {
  return remove_decoy(require_subnet(subnet));
}

}  // namespace decoysim
