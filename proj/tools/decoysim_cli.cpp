// decoysim command line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decoysim/c_api.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); std::fflush(stdout); }

int report(dsim_status status) {
  if (status == DSIM_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", dsim_last_error_code(), dsim_last_error());
  for (size_t i = 0; i < dsim_last_error_diagnostic_count(); ++i) {
    std::fprintf(stderr, "  %s\n", dsim_last_error_diagnostic(i));
  }
  return dsim_status_is_validation(status) ? 1 : 2;
}

struct ConfigHandle {
  dsim_config* ptr = nullptr;
  ~ConfigHandle() { dsim_config_destroy(ptr); }
};

// Options shared by every subcommand that builds a run configuration.
struct RunFlags {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::map<std::string, std::string> named;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "YAML run configuration");
    cmd->add_option("--set", overrides, "Override any config key (key=value)");
    add(cmd, "--data-dir", "data_dir", "Directory holding shipped fixtures");
    add(cmd, "--network", "network", "Network config path");
    add(cmd, "--out", "output_dir", "Output directory");
    add(cmd, "--seed", "seed", "Seed for a single train or evaluate run");
    add(cmd, "--total-timesteps", "total_timesteps", "PPO environment steps");
    add(cmd, "--episodes", "eval_episodes", "Evaluation episodes");
    add(cmd, "--steps", "eval_steps", "Steps per evaluation episode");
    add(cmd, "--threads", "threads", "Worker threads (0 = all cores)");
    cmd->add_flag_callback("--greedy", [this] { named["greedy"] = "true"; },
                           "Evaluate with the argmax action");
  }

  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { named[key] = v; }, help);
  }

  // Returns an exit code on failure.
  std::optional<int> build(ConfigHandle& h) const {
    dsim_status s = config_file.empty() ? dsim_config_create(&h.ptr)
                                        : dsim_config_load(config_file.c_str(), &h.ptr);
    if (s != DSIM_OK) return report(s);
    for (const auto& [k, v] : named) {
      if ((s = dsim_config_set(h.ptr, k.c_str(), v.c_str())) != DSIM_OK) return report(s);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error [cli.InvalidArgument]: --set expects key=value, got '%s'\n",
                     kv.c_str());
        return 1;
      }
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if ((s = dsim_config_set(h.ptr, key.c_str(), value.c_str())) != DSIM_OK) return report(s);
    }
    return std::nullopt;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoy-based cyber defense training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dsim_version());

  RunFlags train_flags, eval_flags, matrix_flags, fixture_flags;
  std::string blue, red, checkpoint;

  auto* train = app.add_subcommand("train", "Train one blue policy");
  train_flags.attach(train);
  train_flags.add(train, "--blue", "blue", "Blue persona name or reward file");
  train_flags.add(train, "--red", "red", "Red persona name or reward file");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained checkpoint");
  eval_flags.attach(evaluate);
  eval_flags.add(evaluate, "--blue", "blue", "Blue persona name or reward file");
  eval_flags.add(evaluate, "--red", "red", "Red persona name or reward file");
  evaluate->add_option("--checkpoint", checkpoint, "policy.json written by train")->required();

  auto* matrix = app.add_subcommand("matrix", "Train and evaluate every blue x red x seed cell");
  matrix_flags.attach(matrix);
  matrix_flags.add(matrix, "--seeds", "seeds", "Comma separated seeds");
  matrix_flags.add(matrix, "--blue-personas", "matrix_blue", "Comma separated blue personas");
  matrix_flags.add(matrix, "--red-personas", "matrix_red", "Comma separated red personas");

  auto* fixtures = app.add_subcommand("validate-fixtures", "Check shipped reward tables");
  fixture_flags.attach(fixtures);

  std::string persona, baseline, design_out, endpoint, model, token_env = "DECOYSIM_API_KEY",
      feedback, recorded;
  auto* design = app.add_subcommand("design-rewards", "Ask a language model for a reward table");
  design->add_option("--persona", persona, "Persona prompt file")->required();
  design->add_option("--baseline", baseline, "Baseline reward file")->required();
  design->add_option("--out", design_out, "Where to write the validated reward file")
      ->required();
  design->add_option("--endpoint", endpoint, "Chat-completions URL");
  design->add_option("--model", model, "Model name");
  design->add_option("--token-env", token_env, "Environment variable holding the API token")
      ->capture_default_str();
  design->add_option("--feedback", feedback, "Expert feedback appended as an extra turn");
  design->add_option("--recorded-response", recorded, "Replay a saved response body");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ConfigHandle cfg;
  if (*train) {
    if (auto rc = train_flags.build(cfg)) return *rc;
    return report(dsim_train(cfg.ptr, print_line, nullptr));
  }
  if (*evaluate) {
    if (auto rc = eval_flags.build(cfg)) return *rc;
    return report(dsim_evaluate(cfg.ptr, checkpoint.c_str(), print_line, nullptr));
  }
  if (*matrix) {
    if (auto rc = matrix_flags.build(cfg)) return *rc;
    return report(dsim_run_matrix(cfg.ptr, print_line, nullptr));
  }
  if (*fixtures) {
    if (auto rc = fixture_flags.build(cfg)) return *rc;
    int checked = 0, failures = 0;
    if (int rc = report(dsim_validate_fixtures(cfg.ptr, print_line, nullptr, &checked,
                                               &failures))) {
      return rc;
    }
    std::printf("%d/%d fixture values match\n", checked - failures, checked);
    return failures == 0 ? 0 : 1;
  }
  if (*design) {
    dsim_design_options opts{};
    opts.persona_prompt_path = persona.c_str();
    opts.baseline_path = baseline.c_str();
    opts.out_path = design_out.c_str();
    opts.endpoint = endpoint.c_str();
    opts.model = model.c_str();
    opts.token_env_var = token_env.c_str();
    opts.feedback = feedback.c_str();
    opts.recorded_response_path = recorded.empty() ? nullptr : recorded.c_str();
    return report(dsim_design_rewards(&opts, print_line, nullptr));
  }
  return 1;
}
