#include "decoysim/rewards.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "decoysim/error.hpp"

namespace decoysim {
namespace {

constexpr const char* kModule = "rewards";

[[noreturn]] void schema_fail(std::vector<std::string> diagnostics) {
  std::string msg = "reward config violates schema";
  for (const auto& d : diagnostics) msg += "; " + d;
  throw Error(ErrorCode::kSchema, kModule, msg, std::move(diagnostics));
}

}  // namespace

std::string_view to_string(AgentKind agent) {
  return agent == AgentKind::kRed ? "red" : "blue";
}

std::vector<std::string> required_actions(AgentKind agent) {
  if (agent == AgentKind::kBlue) return {"nothing", "decoy0", "remove_decoy"};
  std::vector<std::string> out;
  for (RedAction a : kRedActions) out.emplace_back(to_string(a));
  return out;
}

RewardStructure::RewardStructure(AgentKind agent, std::string persona,
                                 std::vector<RewardEntry> entries)
    : agent_(agent), persona_(std::move(persona)) {
  for (auto& e : entries) {
    std::string key = e.action_name;
    entries_.emplace(std::move(key), std::move(e));
  }
}

RewardStructure RewardStructure::load(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, kModule,
                std::string("malformed reward config: ") + e.what());
  }
  if (!root.IsMap()) {
    throw Error(ErrorCode::kParse, kModule, "reward config must be a mapping");
  }

  std::vector<std::string> diags;
  AgentKind agent = AgentKind::kBlue;
  const YAML::Node agent_node = root["agent"];
  if (!agent_node || !agent_node.IsScalar()) {
    diags.push_back("missing 'agent' (red or blue)");
  } else if (agent_node.Scalar() == "red") {
    agent = AgentKind::kRed;
  } else if (agent_node.Scalar() != "blue") {
    diags.push_back("agent must be 'red' or 'blue', got '" +
                    agent_node.Scalar() + "'");
  }
  std::string persona;
  if (root["persona"] && root["persona"].IsScalar()) {
    persona = root["persona"].Scalar();
  }

  std::vector<RewardEntry> entries;
  std::set<std::string> seen;
  const YAML::Node actions = root["actions"];
  if (!actions || !actions.IsSequence()) {
    diags.push_back("missing 'actions' list");
  } else {
    for (const auto& node : actions) {
      if (!node.IsMap() || !node["name"] || !node["name"].IsScalar()) {
        diags.push_back("action entry without a 'name'");
        continue;
      }
      RewardEntry e;
      e.action_name = node["name"].Scalar();
      if (e.action_name.empty()) {
        diags.push_back("action entry with empty name");
        continue;
      }
      if (!seen.insert(e.action_name).second) {
        diags.push_back("duplicate action '" + e.action_name + "'");
        continue;
      }
      auto read_value = [&](const char* key, double& dst) {
        const YAML::Node v = node[key];
        if (!v || !v.IsScalar()) {
          diags.push_back("action '" + e.action_name + "' missing '" + key + "'");
          return;
        }
        try {
          dst = v.as<double>();
        } catch (const YAML::Exception&) {
          diags.push_back("action '" + e.action_name + "' has non-numeric '" +
                          key + "'");
          return;
        }
        if (!std::isfinite(dst)) {
          diags.push_back("action '" + e.action_name + "' has non-finite '" +
                          key + "'");
        }
      };
      read_value("immediate_reward", e.immediate);
      read_value("recurring_reward", e.recurring);
      entries.push_back(std::move(e));
    }
  }

  if (agent_node && agent_node.IsScalar() &&
      (agent_node.Scalar() == "red" || agent_node.Scalar() == "blue")) {
    const auto required = required_actions(agent);
    for (const auto& name : required) {
      if (!seen.contains(name)) diags.push_back("missing action '" + name + "'");
    }
    for (const auto& name : seen) {
      if (std::find(required.begin(), required.end(), name) == required.end()) {
        diags.push_back("unexpected action '" + name + "' for " +
                        std::string(to_string(agent)) + " agent");
      }
    }
  }
  if (!diags.empty()) schema_fail(std::move(diags));
  return RewardStructure(agent, std::move(persona), std::move(entries));
}

const RewardEntry& RewardStructure::entry(std::string_view action_name) const {
  const auto it = entries_.find(action_name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnknownAction, kModule,
                "no reward entry for action '" + std::string(action_name) +
                    "' in " + std::string(to_string(agent_)) + " persona '" +
                    persona_ + "'");
  }
  return it->second;
}

RewardStructure RewardStructure::scaled(double factor) const {
  std::vector<RewardEntry> entries;
  for (const auto& [name, e] : entries_) {
    entries.push_back({name, e.immediate * factor, e.recurring * factor});
  }
  return RewardStructure(agent_, persona_, std::move(entries));
}

std::string RewardStructure::to_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "agent" << YAML::Value << std::string(to_string(agent_));
  out << YAML::Key << "persona" << YAML::Value << persona_;
  out << YAML::Key << "actions" << YAML::Value << YAML::BeginSeq;
  for (const auto& name : required_actions(agent_)) {
    const auto it = entries_.find(name);
    if (it == entries_.end()) continue;
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << name
        << YAML::Key << "immediate_reward" << YAML::Value << it->second.immediate
        << YAML::Key << "recurring_reward" << YAML::Value << it->second.recurring
        << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void RecurringLedger::append(int source_step, double amount) {
  entries_.push_back({source_step, amount});
  total_ += amount;
}

void RecurringLedger::clear() {
  entries_.clear();
  total_ = 0.0;
}

double step_reward(std::string_view blue_action, RedAction red_action,
                   bool target_is_decoy, const RewardStructure& blue_rs,
                   const RewardStructure& red_rs, RecurringLedger& ledger,
                   int step, const RewardOptions& options) {
  const RewardEntry& blue = blue_rs.entry(blue_action);
  const RewardEntry& red = red_rs.entry(to_string(red_action));
  const double sign = target_is_decoy ? options.decoy_hit_multiplier : -1.0;

  const double reward = blue.immediate + sign * red.immediate + ledger.total();
  ledger.append(step, blue.recurring);
  ledger.append(step, sign * red.recurring);
  return reward;
}

double episode_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace decoysim
