#include "decoysim/c_api.h"

#include <fmt/format.h>

#include <cstdlib>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "decoysim/env.hpp"
#include "decoysim/error.hpp"
#include "decoysim/experiment.hpp"
#include "decoysim/hashing.hpp"
#include "decoysim/reward_designer.hpp"
#include "decoysim/rewards.hpp"
#include "decoysim/run_config.hpp"

struct dsim_config {
  decoysim::RunConfig cfg;
};

struct dsim_rewards {
  decoysim::RewardStructure rs;
};

struct dsim_env {
  decoysim::DefenseEnv env;
};

namespace {

using namespace decoysim;

struct LastError {
  std::string message;
  std::string code;
  std::vector<std::string> diagnostics;
};

thread_local LastError g_error;

dsim_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return DSIM_ERR_PARSE;
    case ErrorCode::kValidation: return DSIM_ERR_VALIDATION;
    case ErrorCode::kUnknownSubnet: return DSIM_ERR_UNKNOWN_SUBNET;
    case ErrorCode::kEmptyNetwork: return DSIM_ERR_EMPTY_NETWORK;
    case ErrorCode::kSchema: return DSIM_ERR_SCHEMA;
    case ErrorCode::kUnknownAction: return DSIM_ERR_UNKNOWN_ACTION;
    case ErrorCode::kUnmappedHost: return DSIM_ERR_UNMAPPED_HOST;
    case ErrorCode::kShapeMismatch: return DSIM_ERR_SHAPE_MISMATCH;
    case ErrorCode::kNonFiniteLoss: return DSIM_ERR_NON_FINITE_LOSS;
    case ErrorCode::kCheckFailed: return DSIM_ERR_CHECK_FAILED;
    case ErrorCode::kChecksumMismatch: return DSIM_ERR_CHECKSUM_MISMATCH;
    case ErrorCode::kEmptySamples: return DSIM_ERR_EMPTY_SAMPLES;
    case ErrorCode::kTransport: return DSIM_ERR_TRANSPORT;
    case ErrorCode::kExtraction: return DSIM_ERR_EXTRACTION;
    case ErrorCode::kIo: return DSIM_ERR_IO;
    case ErrorCode::kInvalidArgument: return DSIM_ERR_INVALID_ARGUMENT;
  }
  return DSIM_ERR_INTERNAL;
}

dsim_status fail(dsim_status status, std::string code, std::string message,
                 std::vector<std::string> diagnostics = {}) {
  g_error = {std::move(message), std::move(code), std::move(diagnostics)};
  return status;
}

template <typename F>
dsim_status guarded(F&& body) {
  try {
    body();
    g_error = {};
    return DSIM_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.qualified_code(), e.what(), e.diagnostics());
  } catch (const std::bad_alloc&) {
    return fail(DSIM_ERR_INTERNAL, "cli.OutOfMemory", "out of memory");
  } catch (const std::exception& e) {
    return fail(DSIM_ERR_INTERNAL, "cli.InternalError", e.what());
  }
}

dsim_status null_arg(const char* what) {
  return fail(DSIM_ERR_INVALID_ARGUMENT, "cli.InvalidArgument",
              std::string(what) + " must not be null");
}

void emit(dsim_line_fn fn, void* user, const std::string& line) {
  if (fn) fn(line.c_str(), user);
}

void emit_lines(dsim_line_fn fn, void* user, const std::string& text) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) emit(fn, user, line);
}

void echo_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.yaml", cfg.to_yaml());
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("n/a");
}

// Writes what goes over the wire next to the output file, even when the
// reply later fails extraction or validation.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(Transport& inner, std::filesystem::path stem)
      : inner_(inner), stem_(std::move(stem)) {}
  std::string post(const std::string& url, const std::map<std::string, std::string>& headers,
                   const std::string& body) override {
    write_file(path(".request.json"), body + "\n");
    const std::string response = inner_.post(url, headers, body);
    write_file(path(".response.json"), response);
    return response;
  }

 private:
  std::filesystem::path path(const char* suffix) const {
    return stem_.parent_path() / (stem_.filename().string() + suffix);
  }
  Transport& inner_;
  std::filesystem::path stem_;
};

}  // namespace

extern "C" {

const char* dsim_last_error(void) { return g_error.message.c_str(); }
const char* dsim_last_error_code(void) { return g_error.code.c_str(); }
size_t dsim_last_error_diagnostic_count(void) { return g_error.diagnostics.size(); }
const char* dsim_last_error_diagnostic(size_t index) {
  return index < g_error.diagnostics.size() ? g_error.diagnostics[index].c_str() : "";
}

int dsim_status_is_validation(dsim_status status) {
  switch (status) {
    case DSIM_ERR_PARSE:
    case DSIM_ERR_VALIDATION:
    case DSIM_ERR_UNKNOWN_SUBNET:
    case DSIM_ERR_EMPTY_NETWORK:
    case DSIM_ERR_SCHEMA:
    case DSIM_ERR_UNKNOWN_ACTION:
    case DSIM_ERR_CHECKSUM_MISMATCH:
    case DSIM_ERR_EXTRACTION:
    case DSIM_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 0;
  }
}

const char* dsim_version(void) { return "0.1.0"; }

dsim_status dsim_config_create(dsim_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new dsim_config{}; });
}

dsim_status dsim_config_load(const char* path, dsim_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new dsim_config{RunConfig::load(path)}; });
}

dsim_status dsim_config_set(dsim_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

dsim_status dsim_config_to_yaml(const dsim_config* cfg, dsim_line_fn sink, void* user) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { emit_lines(sink, user, cfg->cfg.to_yaml()); });
}

dsim_status dsim_config_output_dir(const dsim_config* cfg, dsim_line_fn sink, void* user) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { emit(sink, user, cfg->cfg.output_dir.string()); });
}

dsim_status dsim_config_check_paths(const dsim_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cfg->cfg.check_paths(); });
}

void dsim_config_destroy(dsim_config* cfg) { delete cfg; }

dsim_status dsim_train(const dsim_config* cfg, dsim_line_fn progress, void* user) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    c.check_paths();
    echo_config(c, c.output_dir);
    const int total = c.ppo.num_updates();
    const auto out = train_run(c, c.blue, c.red, c.seed(), c.output_dir,
                               [&](const UpdateMetrics& m) {
                                 emit(progress, user,
                                      fmt::format("update {}/{} step {} return {} "
                                                  "policy_loss {:.4f} value_loss {:.4f} "
                                                  "entropy {:.4f}",
                                                  m.update, total, m.global_step,
                                                  fmt_opt(m.mean_episodic_return),
                                                  m.policy_loss, m.value_loss, m.entropy));
                               });
    emit(progress, user, "checkpoint " + out.checkpoint.string());
    emit(progress, user, "metrics " + out.metrics_csv.string());
  });
}

dsim_status dsim_evaluate(const dsim_config* cfg, const char* checkpoint,
                          dsim_line_fn progress, void* user) {
  if (!cfg) return null_arg("cfg");
  if (!checkpoint) return null_arg("checkpoint");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    c.check_paths();
    if (!std::filesystem::exists(checkpoint)) {
      throw Error(ErrorCode::kInvalidArgument, "cli",
                  std::string("checkpoint not found: ") + checkpoint);
    }
    echo_config(c, c.output_dir / "eval");
    const CellSummary cell =
        evaluate_run(c, checkpoint, c.blue, c.red, c.seed(), c.output_dir / "eval");
    emit(progress, user,
         fmt::format("{} vs {}: episodes {} censored {} exceedance_95 {} "
                     "(excluding censored {}, order statistic {})",
                     cell.blue, cell.red, cell.records.size(), cell.censored,
                     cell.exceedance_95, cell.exceedance_95_excluding_censored,
                     cell.order_statistic_95));
    for (const auto& [name, f] : cell.blue_freq_pre_impact) {
      emit(progress, user, fmt::format("pre-impact blue {} {:.3f}", name, f));
    }
    emit(progress, user, "outputs " + (c.output_dir / "eval").string());
  });
}

dsim_status dsim_run_matrix(const dsim_config* cfg, dsim_line_fn progress, void* user) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    const RunConfig& c = cfg->cfg;
    c.check_paths();
    echo_config(c, c.output_dir);
    const MatrixReport report =
        run_matrix(c, [&](const std::string& line) { emit(progress, user, line); });
    for (const auto& [red, blue] : report.mixed_strategy) {
      emit(progress, user, fmt::format("best blue against {}: {}", red, blue));
    }
    emit(progress, user, "matrix " + report.json_path.string());
  });
}

dsim_status dsim_validate_fixtures(const dsim_config* cfg, dsim_line_fn sink, void* user,
                                   int* checked, int* failures) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    int bad = 0;
    const auto checks = check_shipped_fixtures(cfg->cfg.data_dir);
    for (const auto& a : checks) {
      if (!a.passed()) ++bad;
      emit(sink, user,
           fmt::format("{} {}/{} {} {} expected {} got {}", a.passed() ? "PASS" : "FAIL",
                       a.agent, a.persona, a.action, a.field, a.expected, a.actual));
    }
    if (checked) *checked = static_cast<int>(checks.size());
    if (failures) *failures = bad;
  });
}

dsim_status dsim_design_rewards(const dsim_design_options* opts, dsim_line_fn progress,
                                void* user) {
  if (!opts) return null_arg("opts");
  if (!opts->persona_prompt_path || !opts->baseline_path || !opts->out_path) {
    return null_arg("persona_prompt_path/baseline_path/out_path");
  }
  return guarded([&] {
    const std::filesystem::path baseline = opts->baseline_path;
    const std::filesystem::path out = opts->out_path;
    DesignRequest req;
    req.persona_prompt = read_file(opts->persona_prompt_path);
    req.context_documents = {{"environment", default_environment_context()},
                             {baseline.filename().string(), read_file(baseline)}};
    req.model_endpoint = opts->endpoint ? opts->endpoint : "";
    req.model_name = opts->model ? opts->model : "";
    req.auth_token_env_var = opts->token_env_var ? opts->token_env_var : "";
    if (opts->feedback && *opts->feedback) req = refine_prompt(req, opts->feedback);

    std::unique_ptr<Transport> inner;
    if (opts->recorded_response_path) {
      inner = std::make_unique<FixtureTransport>(read_file(opts->recorded_response_path));
    } else {
      if (req.model_endpoint.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "reward_designer",
                    "no model endpoint configured");
      }
      inner = std::make_unique<HttpTransport>();
    }
    if (!out.parent_path().empty()) std::filesystem::create_directories(out.parent_path());
    RecordingTransport transport(*inner, out);
    emit(progress, user, "requesting reward structure");
    const DesignResult result = design_rewards(req, transport);
    write_file(out, result.extracted_config);
    emit(progress, user, fmt::format("validated {} persona '{}' with {} actions -> {}",
                                     to_string(result.validated->agent()),
                                     result.validated->persona(),
                                     result.validated->entries().size(), out.string()));
  });
}

dsim_status dsim_rewards_load(const char* path, dsim_rewards** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new dsim_rewards{RewardStructure::load(read_file(path))}; });
}

dsim_status dsim_rewards_get(const dsim_rewards* rs, const char* action, double* immediate,
                             double* recurring) {
  if (!rs) return null_arg("rs");
  if (!action) return null_arg("action");
  return guarded([&] {
    const RewardEntry& e = rs->rs.entry(action);
    if (immediate) *immediate = e.immediate;
    if (recurring) *recurring = e.recurring;
  });
}

size_t dsim_rewards_action_count(const dsim_rewards* rs) {
  return rs ? rs->rs.entries().size() : 0;
}

void dsim_rewards_destroy(dsim_rewards* rs) { delete rs; }

dsim_status dsim_env_create(const dsim_config* cfg, dsim_env** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] {
    FixtureSet fx = load_fixture_set(cfg->cfg, cfg->cfg.blue, cfg->cfg.red);
    *out = new dsim_env{DefenseEnv(std::move(fx.env))};
  });
}

size_t dsim_env_observation_size(const dsim_env* env) {
  return env ? env->env.observation_size() : 0;
}

size_t dsim_env_action_count(const dsim_env* env) { return env ? env->env.action_count() : 0; }

static dsim_status copy_obs(const std::vector<double>& obs, double* dst, size_t len) {
  if (dst == nullptr) return DSIM_OK;
  if (len < obs.size()) {
    return fail(DSIM_ERR_SHAPE_MISMATCH, "cli.ShapeMismatch",
                fmt::format("observation buffer holds {} values, need {}", len, obs.size()));
  }
  std::copy(obs.begin(), obs.end(), dst);
  return DSIM_OK;
}

dsim_status dsim_env_reset(dsim_env* env, uint64_t seed, double* obs, size_t obs_len) {
  if (!env) return null_arg("env");
  std::vector<double> o;
  const dsim_status s = guarded([&] { o = env->env.reset(seed); });
  return s == DSIM_OK ? copy_obs(o, obs, obs_len) : s;
}

dsim_status dsim_env_step(dsim_env* env, size_t action, double* obs, size_t obs_len,
                          double* reward, int* done) {
  if (!env) return null_arg("env");
  Transition t;
  const dsim_status s = guarded([&] { t = env->env.step(action); });
  if (s != DSIM_OK) return s;
  if (reward) *reward = t.reward;
  if (done) *done = t.done ? 1 : 0;
  return copy_obs(t.observation, obs, obs_len);
}

void dsim_env_destroy(dsim_env* env) { delete env; }

}  // extern "C"
