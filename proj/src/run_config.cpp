#include "decoysim/run_config.hpp"

#include <fmt/format.h>

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <functional>
#include <map>

#include "decoysim/error.hpp"
#include "decoysim/hashing.hpp"

namespace decoysim {
namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kInvalidArgument, kModule,
              "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    std::string item(text.substr(start, end - start));
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
  return out;
}

bool looks_like_path(const std::string& ref) {
  return ref.find('/') != std::string::npos || ref.ends_with(".yaml") ||
         ref.ends_with(".yml");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    out.push_back(parse_number<std::uint64_t>("seeds", item));
  }
  if (out.empty()) bad_value("seeds", text);
  return out;
}

std::string persona_label(const std::string& ref) {
  if (!looks_like_path(ref)) return ref;
  return std::filesystem::path(ref).stem().string();
}

void RunConfig::set(std::string_view key, std::string_view value) {
  using Setter = std::function<void(RunConfig&, std::string_view)>;
  static const std::map<std::string, Setter, std::less<>> kSetters = {
      {"data_dir", [](RunConfig& c, std::string_view v) { c.data_dir = v; }},
      {"network", [](RunConfig& c, std::string_view v) { c.network = v; }},
      {"blue", [](RunConfig& c, std::string_view v) { c.blue = v; }},
      {"red", [](RunConfig& c, std::string_view v) { c.red = v; }},
      {"matrix_blue", [](RunConfig& c, std::string_view v) { c.matrix_blue = split_list(v); }},
      {"matrix_red", [](RunConfig& c, std::string_view v) { c.matrix_red = split_list(v); }},
      {"seeds", [](RunConfig& c, std::string_view v) { c.seeds = parse_seed_list(v); }},
      {"seed", [](RunConfig& c, std::string_view v) {
         c.ppo.seed = parse_number<std::uint64_t>("seed", v);
       }},
      {"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = v; }},
      {"learning_rate", [](RunConfig& c, std::string_view v) {
         c.ppo.learning_rate = parse_number<double>("learning_rate", v);
       }},
      {"anneal_lr", [](RunConfig& c, std::string_view v) { c.ppo.anneal_lr = parse_bool("anneal_lr", v); }},
      {"gamma", [](RunConfig& c, std::string_view v) { c.ppo.gamma = parse_number<double>("gamma", v); }},
      {"gae_lambda", [](RunConfig& c, std::string_view v) {
         c.ppo.gae_lambda = parse_number<double>("gae_lambda", v);
       }},
      {"num_minibatches", [](RunConfig& c, std::string_view v) {
         c.ppo.num_minibatches = parse_number<int>("num_minibatches", v);
       }},
      {"update_epochs", [](RunConfig& c, std::string_view v) {
         c.ppo.update_epochs = parse_number<int>("update_epochs", v);
       }},
      {"clip_coef", [](RunConfig& c, std::string_view v) { c.ppo.clip_coef = parse_number<double>("clip_coef", v); }},
      {"ent_coef", [](RunConfig& c, std::string_view v) { c.ppo.ent_coef = parse_number<double>("ent_coef", v); }},
      {"vf_coef", [](RunConfig& c, std::string_view v) { c.ppo.vf_coef = parse_number<double>("vf_coef", v); }},
      {"max_grad_norm", [](RunConfig& c, std::string_view v) {
         c.ppo.max_grad_norm = parse_number<double>("max_grad_norm", v);
       }},
      {"normalize_advantages", [](RunConfig& c, std::string_view v) {
         c.ppo.normalize_advantages = parse_bool("normalize_advantages", v);
       }},
      {"rollout_length", [](RunConfig& c, std::string_view v) {
         c.ppo.rollout_length = parse_number<int>("rollout_length", v);
       }},
      {"num_envs", [](RunConfig& c, std::string_view v) { c.ppo.num_envs = parse_number<int>("num_envs", v); }},
      {"total_timesteps", [](RunConfig& c, std::string_view v) {
         c.ppo.total_timesteps = parse_number<std::int64_t>("total_timesteps", v);
       }},
      {"hidden", [](RunConfig& c, std::string_view v) {
         c.ppo.hidden.clear();
         for (const auto& h : split_list(v)) c.ppo.hidden.push_back(parse_number<std::size_t>("hidden", h));
       }},
      {"max_steps", [](RunConfig& c, std::string_view v) { c.max_steps = parse_number<int>("max_steps", v); }},
      {"decoy_hit_multiplier", [](RunConfig& c, std::string_view v) {
         c.decoy_hit_multiplier = parse_number<double>("decoy_hit_multiplier", v);
       }},
      {"eval_episodes", [](RunConfig& c, std::string_view v) {
         c.eval_episodes = parse_number<int>("eval_episodes", v);
       }},
      {"eval_steps", [](RunConfig& c, std::string_view v) { c.eval_steps = parse_number<int>("eval_steps", v); }},
      {"greedy", [](RunConfig& c, std::string_view v) { c.greedy = parse_bool("greedy", v); }},
      {"eval_base_seed", [](RunConfig& c, std::string_view v) {
         c.eval_base_seed = parse_number<std::uint64_t>("eval_base_seed", v);
       }},
      {"reuse_checkpoints", [](RunConfig& c, std::string_view v) {
         c.reuse_checkpoints = parse_bool("reuse_checkpoints", v);
       }},
      {"threads", [](RunConfig& c, std::string_view v) { c.threads = parse_number<int>("threads", v); }},
  };
  const auto it = kSetters.find(key);
  if (it == kSetters.end()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "unknown configuration key '" + std::string(key) + "'");
  }
  it->second(*this, value);
}

RunConfig RunConfig::from_yaml(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, kModule, std::string("malformed run config: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw Error(ErrorCode::kParse, kModule, "run config must be a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (kv.second.IsSequence()) {
      std::vector<std::string> items;
      for (const auto& item : kv.second) items.push_back(item.as<std::string>());
      cfg.set(key, join(items));
    } else if (kv.second.IsScalar()) {
      cfg.set(key, kv.second.Scalar());
    } else {
      throw Error(ErrorCode::kParse, kModule, "run config key '" + key + "' must be a scalar or list");
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_yaml(read_file(path));
}

std::string RunConfig::to_yaml() const {
  // Shortest round-trip form keeps the echo readable ("0.00025").
  const auto shortest = [](double v) { return fmt::format("{}", v); };
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "data_dir" << YAML::Value << data_dir.string();
  out << YAML::Key << "network" << YAML::Value << network;
  out << YAML::Key << "blue" << YAML::Value << blue;
  out << YAML::Key << "red" << YAML::Value << red;
  out << YAML::Key << "matrix_blue" << YAML::Value << YAML::Flow << matrix_blue;
  out << YAML::Key << "matrix_red" << YAML::Value << YAML::Flow << matrix_red;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << seeds;
  out << YAML::Key << "seed" << YAML::Value << ppo.seed;
  out << YAML::Key << "output_dir" << YAML::Value << output_dir.string();
  out << YAML::Key << "learning_rate" << YAML::Value << shortest(ppo.learning_rate);
  out << YAML::Key << "anneal_lr" << YAML::Value << ppo.anneal_lr;
  out << YAML::Key << "gamma" << YAML::Value << shortest(ppo.gamma);
  out << YAML::Key << "gae_lambda" << YAML::Value << shortest(ppo.gae_lambda);
  out << YAML::Key << "num_minibatches" << YAML::Value << ppo.num_minibatches;
  out << YAML::Key << "update_epochs" << YAML::Value << ppo.update_epochs;
  out << YAML::Key << "clip_coef" << YAML::Value << shortest(ppo.clip_coef);
  out << YAML::Key << "ent_coef" << YAML::Value << shortest(ppo.ent_coef);
  out << YAML::Key << "vf_coef" << YAML::Value << shortest(ppo.vf_coef);
  out << YAML::Key << "max_grad_norm" << YAML::Value << shortest(ppo.max_grad_norm);
  out << YAML::Key << "normalize_advantages" << YAML::Value << ppo.normalize_advantages;
  out << YAML::Key << "rollout_length" << YAML::Value << ppo.rollout_length;
  out << YAML::Key << "num_envs" << YAML::Value << ppo.num_envs;
  out << YAML::Key << "total_timesteps" << YAML::Value << ppo.total_timesteps;
  out << YAML::Key << "hidden" << YAML::Value << YAML::Flow << ppo.hidden;
  out << YAML::Key << "max_steps" << YAML::Value << max_steps;
  out << YAML::Key << "decoy_hit_multiplier" << YAML::Value << shortest(decoy_hit_multiplier);
  out << YAML::Key << "eval_episodes" << YAML::Value << eval_episodes;
  out << YAML::Key << "eval_steps" << YAML::Value << eval_steps;
  out << YAML::Key << "greedy" << YAML::Value << greedy;
  if (eval_base_seed) out << YAML::Key << "eval_base_seed" << YAML::Value << *eval_base_seed;
  out << YAML::Key << "reuse_checkpoints" << YAML::Value << reuse_checkpoints;
  out << YAML::Key << "threads" << YAML::Value << threads;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::uint64_t RunConfig::evaluation_seed(std::uint64_t seed) const {
  if (eval_base_seed) return *eval_base_seed;
  // Keep it readable in logs: a 32-bit value derived from the run seed.
  return derive_seed(seed, SeedStream::kEvaluation) & 0xffffffffULL;
}

std::filesystem::path RunConfig::resolve_network() const {
  const std::filesystem::path p(network);
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  return data_dir / p;
}

std::filesystem::path RunConfig::resolve_persona(AgentKind agent,
                                                 const std::string& name) const {
  if (looks_like_path(name)) {
    const std::filesystem::path p(name);
    if (p.is_absolute() || std::filesystem::exists(p)) return p;
    return data_dir / p;
  }
  return data_dir / "rewards" / std::string(to_string(agent)) / (name + ".yaml");
}

void RunConfig::check_paths() const {
  auto require = [](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  what + " '" + p.string() + "' does not exist");
    }
  };
  require(resolve_network(), "network config");
  require(resolve_persona(AgentKind::kBlue, blue), "blue reward config");
  require(resolve_persona(AgentKind::kRed, red), "red reward config");
  for (const auto& b : matrix_blue) {
    require(resolve_persona(AgentKind::kBlue, b), "blue reward config");
  }
  for (const auto& r : matrix_red) {
    require(resolve_persona(AgentKind::kRed, r), "red reward config");
  }
}

}  // namespace decoysim
