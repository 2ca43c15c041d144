#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decoysim/blueteam.hpp"
#include "decoysim/redteam.hpp"

namespace decoysim {

enum class AgentKind { kRed, kBlue };

std::string_view to_string(AgentKind agent);

struct RewardEntry {
  std::string action_name;
  double immediate = 0.0;
  double recurring = 0.0;

  bool operator==(const RewardEntry&) const = default;
};

// One persona's reward table. Immutable once loaded.
class RewardStructure {
 public:
  RewardStructure(AgentKind agent, std::string persona,
                  std::vector<RewardEntry> entries);

  // Throws Error{kParse} for malformed YAML and Error{kSchema} (with one
  // diagnostic per violation) when the action set or values are wrong.
  static RewardStructure load(std::string_view yaml_text);

  AgentKind agent() const { return agent_; }
  const std::string& persona() const { return persona_; }
  const std::map<std::string, RewardEntry, std::less<>>& entries() const {
    return entries_;
  }

  // Throws Error{kUnknownAction}.
  const RewardEntry& entry(std::string_view action_name) const;

  RewardStructure scaled(double factor) const;
  std::string to_yaml() const;

  bool operator==(const RewardStructure&) const = default;

 private:
  AgentKind agent_;
  std::string persona_;
  std::map<std::string, RewardEntry, std::less<>> entries_;
};

// The exact action-name sets a structure must cover.
std::vector<std::string> required_actions(AgentKind agent);

// Recurring charges accrued so far in an episode. total() is the running sum
// in append order.
class RecurringLedger {
 public:
  struct Entry {
    int source_step = 0;
    double amount = 0.0;
  };

  void append(int source_step, double amount);
  double total() const { return total_; }
  std::span<const Entry> entries() const { return entries_; }
  void clear();

 private:
  std::vector<Entry> entries_;
  double total_ = 0.0;
};

struct RewardOptions {
  // Scales red terms when the red target was a decoy.
  double decoy_hit_multiplier = 1.0;
};

// Composite defender reward for one step:
//   blue.immediate + sign * red.immediate + (recurring charged so far)
// with sign = +multiplier on decoy targets and -1 otherwise. Afterwards the
// step's blue recurring and signed red recurring join the ledger, so they are
// first charged on the next step.
double step_reward(std::string_view blue_action, RedAction red_action,
                   bool target_is_decoy, const RewardStructure& blue_rs,
                   const RewardStructure& red_rs, RecurringLedger& ledger,
                   int step, const RewardOptions& options = {});

// sum_t gamma^t r_t
double episode_return(std::span<const double> rewards, double gamma);

}  // namespace decoysim
