#include "decoysim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <json.hpp>

#include "decoysim/error.hpp"
#include "decoysim/hashing.hpp"

namespace decoysim {
namespace {

using nlohmann::json;
constexpr const char* kFormat = "decoysim-checkpoint/1";

json config_to_json(const PpoConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"anneal_lr", c.anneal_lr},
              {"gamma", c.gamma},
              {"gae_lambda", c.gae_lambda},
              {"num_minibatches", c.num_minibatches},
              {"update_epochs", c.update_epochs},
              {"clip_coef", c.clip_coef},
              {"ent_coef", c.ent_coef},
              {"vf_coef", c.vf_coef},
              {"max_grad_norm", c.max_grad_norm},
              {"normalize_advantages", c.normalize_advantages},
              {"rollout_length", c.rollout_length},
              {"num_envs", c.num_envs},
              {"total_timesteps", c.total_timesteps},
              {"seed", c.seed},
              {"hidden", c.hidden}};
}

PpoConfig config_from_json(const json& j) {
  PpoConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.anneal_lr = j.at("anneal_lr").get<bool>();
  c.gamma = j.at("gamma").get<double>();
  c.gae_lambda = j.at("gae_lambda").get<double>();
  c.num_minibatches = j.at("num_minibatches").get<int>();
  c.update_epochs = j.at("update_epochs").get<int>();
  c.clip_coef = j.at("clip_coef").get<double>();
  c.ent_coef = j.at("ent_coef").get<double>();
  c.vf_coef = j.at("vf_coef").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  c.normalize_advantages = j.at("normalize_advantages").get<bool>();
  c.rollout_length = j.at("rollout_length").get<int>();
  c.num_envs = j.at("num_envs").get<int>();
  c.total_timesteps = j.at("total_timesteps").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  return c;
}

std::string pack_f32(const std::vector<double>& params) {
  std::string out(params.size() * 4, '\0');
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(params[i]));
    for (int b = 0; b < 4; ++b) {
      out[i * 4 + static_cast<std::size_t>(b)] =
          static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  return out;
}

std::vector<double> unpack_f32(std::string_view bytes) {
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
              << (8 * b);
    }
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

}  // namespace

std::filesystem::path save_checkpoint(const std::filesystem::path& path,
                                      const ActorCritic& net,
                                      const CheckpointMetadata& meta) {
  std::filesystem::path json_path = path;
  json_path.replace_extension(".json");
  std::filesystem::path params_path = path;
  params_path.replace_extension(".f32");

  const std::string blob = pack_f32(net.parameters());
  json j{{"format", kFormat},
         {"parameters_file", params_path.filename().string()},
         {"parameters_sha256", sha256_hex(blob)},
         {"parameter_count", net.parameters().size()},
         {"architecture",
          {{"observation_size", net.observation_size()},
           {"action_count", net.action_count()},
           {"hidden", net.hidden()},
           {"activation", "tanh"},
           {"layout", "actor then critic; per layer W (out x in, column-major) then b"}}},
         {"blue_persona", meta.blue_persona},
         {"red_persona", meta.red_persona},
         {"config", config_to_json(meta.config)},
         {"seed", meta.config.seed},
         {"global_steps", meta.global_steps},
         {"decoy_hit_multiplier", meta.decoy_hit_multiplier},
         {"max_steps", meta.max_steps},
         {"fixtures",
          {{"network_sha256", meta.fixtures.network},
           {"blue_rewards_sha256", meta.fixtures.blue_rewards},
           {"red_rewards_sha256", meta.fixtures.red_rewards}}}};
  write_file(params_path, blob);
  write_file(json_path, j.dump(2) + "\n");
  return json_path;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::filesystem::path json_path = path;
  json_path.replace_extension(".json");
  json j;
  try {
    j = json::parse(read_file(json_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "checkpoint",
                "bad checkpoint metadata '" + json_path.string() + "': " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::kParse, "checkpoint", "unsupported checkpoint format");
    }
    const std::filesystem::path params_path =
        json_path.parent_path() / j.at("parameters_file").get<std::string>();
    const std::string blob = read_file(params_path);
    if (sha256_hex(blob) != j.at("parameters_sha256").get<std::string>()) {
      throw Error(ErrorCode::kChecksumMismatch, "checkpoint",
                  "parameter file '" + params_path.string() +
                      "' does not match its recorded SHA-256");
    }
    const auto& arch = j.at("architecture");
    Checkpoint cp;
    cp.net = ActorCritic(arch.at("observation_size").get<std::size_t>(),
                         arch.at("action_count").get<std::size_t>(),
                         arch.at("hidden").get<std::vector<std::size_t>>());
    std::vector<double> params = unpack_f32(blob);
    if (params.size() != cp.net.parameters().size() ||
        params.size() != j.at("parameter_count").get<std::size_t>()) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint",
                  "parameter count does not match the recorded architecture");
    }
    cp.net.parameters() = std::move(params);
    cp.meta.blue_persona = j.at("blue_persona").get<std::string>();
    cp.meta.red_persona = j.at("red_persona").get<std::string>();
    cp.meta.config = config_from_json(j.at("config"));
    cp.meta.global_steps = j.at("global_steps").get<std::int64_t>();
    cp.meta.decoy_hit_multiplier = j.at("decoy_hit_multiplier").get<double>();
    cp.meta.max_steps = j.at("max_steps").get<int>();
    const auto& fx = j.at("fixtures");
    cp.meta.fixtures = {fx.at("network_sha256").get<std::string>(),
                        fx.at("blue_rewards_sha256").get<std::string>(),
                        fx.at("red_rewards_sha256").get<std::string>()};
    return cp;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "checkpoint",
                "bad checkpoint metadata '" + json_path.string() + "': " + e.what());
  }
}

void verify_fixtures(const CheckpointMetadata& meta, const FixtureHashes& actual) {
  auto check = [](const std::string& what, const std::string& want,
                  const std::string& got) {
    if (want != got) {
      throw Error(ErrorCode::kChecksumMismatch, "evalharness",
                  what + " differs from the one the checkpoint was trained on (" +
                      want.substr(0, 12) + " vs " + got.substr(0, 12) + ")");
    }
  };
  check("network config", meta.fixtures.network, actual.network);
  check("blue reward config", meta.fixtures.blue_rewards, actual.blue_rewards);
  check("red reward config", meta.fixtures.red_rewards, actual.red_rewards);
}

}  // namespace decoysim
