#ifndef DECOYSIM_C_API_H
#define DECOYSIM_C_API_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef DECOYSIM_BUILDING_LIBRARY
#    define DSIM_API __declspec(dllexport)
#  else
#    define DSIM_API __declspec(dllimport)
#  endif
#else
#  define DSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsim_status {
  DSIM_OK = 0,
  DSIM_ERR_PARSE = 1,
  DSIM_ERR_VALIDATION = 2,
  DSIM_ERR_UNKNOWN_SUBNET = 3,
  DSIM_ERR_EMPTY_NETWORK = 4,
  DSIM_ERR_SCHEMA = 5,
  DSIM_ERR_UNKNOWN_ACTION = 6,
  DSIM_ERR_UNMAPPED_HOST = 7,
  DSIM_ERR_SHAPE_MISMATCH = 8,
  DSIM_ERR_NON_FINITE_LOSS = 9,
  DSIM_ERR_CHECK_FAILED = 10,
  DSIM_ERR_CHECKSUM_MISMATCH = 11,
  DSIM_ERR_EMPTY_SAMPLES = 12,
  DSIM_ERR_TRANSPORT = 13,
  DSIM_ERR_EXTRACTION = 14,
  DSIM_ERR_IO = 15,
  DSIM_ERR_INVALID_ARGUMENT = 16,
  DSIM_ERR_INTERNAL = 99
} dsim_status;

typedef struct dsim_config dsim_config;
typedef struct dsim_rewards dsim_rewards;
typedef struct dsim_env dsim_env;

/* Receives one line of text (no trailing newline). */
typedef void (*dsim_line_fn)(const char* line, void* user);

/* Details of the last failure on the calling thread. */
DSIM_API const char* dsim_last_error(void);
/* Module-qualified code, e.g. "rewards.SchemaError". */
DSIM_API const char* dsim_last_error_code(void);
DSIM_API size_t dsim_last_error_diagnostic_count(void);
DSIM_API const char* dsim_last_error_diagnostic(size_t index);
/* True for statuses that mean "input rejected" rather than "run failed". */
DSIM_API int dsim_status_is_validation(dsim_status status);

DSIM_API const char* dsim_version(void);

/* --- run configuration --- */

DSIM_API dsim_status dsim_config_create(dsim_config** out);
DSIM_API dsim_status dsim_config_load(const char* path, dsim_config** out);
/* Key names follow the config file; lists are comma separated. */
DSIM_API dsim_status dsim_config_set(dsim_config* cfg, const char* key, const char* value);
DSIM_API dsim_status dsim_config_to_yaml(const dsim_config* cfg, dsim_line_fn sink, void* user);
DSIM_API dsim_status dsim_config_output_dir(const dsim_config* cfg, dsim_line_fn sink, void* user);
/* Fails naming the first missing input path. */
DSIM_API dsim_status dsim_config_check_paths(const dsim_config* cfg);
DSIM_API void dsim_config_destroy(dsim_config* cfg);

/* --- workflows; progress lines go to `progress` when non-null --- */

/* Trains cfg.blue against cfg.red with cfg.seed into cfg.output_dir. */
DSIM_API dsim_status dsim_train(const dsim_config* cfg, dsim_line_fn progress, void* user);
/* Evaluates a checkpoint against cfg.blue / cfg.red fixtures. */
DSIM_API dsim_status dsim_evaluate(const dsim_config* cfg, const char* checkpoint,
                                   dsim_line_fn progress, void* user);
DSIM_API dsim_status dsim_run_matrix(const dsim_config* cfg, dsim_line_fn progress,
                                     void* user);
/* One line per table value; *checked receives the number of values compared
   and *failures the mismatch count. Either pointer may be null. */
DSIM_API dsim_status dsim_validate_fixtures(const dsim_config* cfg, dsim_line_fn sink,
                                            void* user, int* checked, int* failures);

typedef struct dsim_design_options {
  const char* persona_prompt_path;
  const char* baseline_path;
  const char* out_path;
  const char* endpoint;
  const char* model;
  const char* token_env_var;
  /* Optional expert feedback appended as an extra turn. */
  const char* feedback;
  /* When set, replays this recorded response instead of calling out. */
  const char* recorded_response_path;
} dsim_design_options;

/* Writes the validated config to out_path and the request/response
   transcripts beside it. */
DSIM_API dsim_status dsim_design_rewards(const dsim_design_options* opts,
                                         dsim_line_fn progress, void* user);

/* --- reward tables --- */

DSIM_API dsim_status dsim_rewards_load(const char* path, dsim_rewards** out);
DSIM_API dsim_status dsim_rewards_get(const dsim_rewards* rs, const char* action,
                                      double* immediate, double* recurring);
DSIM_API size_t dsim_rewards_action_count(const dsim_rewards* rs);
DSIM_API void dsim_rewards_destroy(dsim_rewards* rs);

/* --- environment --- */

DSIM_API dsim_status dsim_env_create(const dsim_config* cfg, dsim_env** out);
DSIM_API size_t dsim_env_observation_size(const dsim_env* env);
DSIM_API size_t dsim_env_action_count(const dsim_env* env);
/* obs must hold dsim_env_observation_size() values. */
DSIM_API dsim_status dsim_env_reset(dsim_env* env, uint64_t seed, double* obs, size_t obs_len);
DSIM_API dsim_status dsim_env_step(dsim_env* env, size_t action, double* obs, size_t obs_len,
                                   double* reward, int* done);
DSIM_API void dsim_env_destroy(dsim_env* env);

#ifdef __cplusplus
}
#endif

#endif
