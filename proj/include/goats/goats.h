/*
 * C interface to the goats curriculum-RL library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns a goats_status; on failure goats_last_error() holds a
 * message for the calling thread until its next failing call.
 */
#ifndef GOATS_H
#define GOATS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(GOATS_BUILDING_LIBRARY)
#define GOATS_API __attribute__((visibility("default")))
#else
#define GOATS_API
#endif

typedef enum goats_status {
  GOATS_OK = 0,
  GOATS_ERR_INVALID_ARGUMENT = 1,
  GOATS_ERR_CONFIG = 2,
  GOATS_ERR_IO = 3,
  GOATS_ERR_VERSION = 4,
  GOATS_ERR_NUMERICAL = 5,
  GOATS_ERR_CHECK_FAILED = 6,
  GOATS_ERR_INTERNAL = 7
} goats_status;

typedef struct goats_config goats_config;
typedef struct goats_checkpoint goats_checkpoint;

typedef void (*goats_progress_fn)(const char* message, void* user);

GOATS_API const char* goats_last_error(void);
GOATS_API const char* goats_status_string(goats_status status);
/* Comma-separated list of variant names. */
GOATS_API const char* goats_variant_names(void);
/* Releases strings returned through char** out-parameters. */
GOATS_API void goats_string_free(char* s);

/* ---- run configuration ---- */

/* preset: "bowl" or "bucket". */
GOATS_API goats_status goats_config_default(const char* preset, goats_config** out);
GOATS_API goats_status goats_config_load(const char* path, goats_config** out);
GOATS_API goats_status goats_config_parse(const char* text, goats_config** out);
GOATS_API goats_status goats_config_save(const goats_config* config, const char* path);
GOATS_API goats_status goats_config_to_string(const goats_config* config, char** out);
GOATS_API goats_status goats_config_set_variant(goats_config* config, const char* name);
GOATS_API goats_status goats_config_set_seed(goats_config* config, uint64_t seed);
GOATS_API goats_status goats_config_set_output_dir(goats_config* config, const char* dir);
GOATS_API goats_status goats_config_get_output_dir(const goats_config* config, char** out);
GOATS_API void goats_config_free(goats_config* config);

/* ---- training ---- */

typedef struct goats_train_summary {
  double best_eval_reward;
  double best_amount_error;
  double best_pos_success_rate;
  int evaluations;
} goats_train_summary;

/* Trains into the configured output directory (metrics.csv, checkpoints).
 * Returns GOATS_ERR_NUMERICAL on a NaN abort; the error message names the
 * diagnostic snapshot. */
GOATS_API goats_status goats_train(const goats_config* config, goats_train_summary* out);

/* ---- checkpoints and evaluation ---- */

GOATS_API goats_status goats_checkpoint_load(const char* path, goats_checkpoint** out);
GOATS_API void goats_checkpoint_free(goats_checkpoint* ckpt);

typedef struct goats_eval_report {
  double mean_reward;
  double reward_se;
  double amount_error_mean;
  double amount_error_se;
  double pos_success_rate;
  double amount_error_at_reach_mean;
  int episodes;
} goats_eval_report;

/* Deterministic-policy evaluation on freshly sampled goals and initial
 * states. trace_path may be NULL; otherwise the first episode's per-step
 * trace is written there as CSV. */
GOATS_API goats_status goats_evaluate(const goats_checkpoint* ckpt, int episodes, uint64_t seed,
                                      const char* trace_path, goats_eval_report* out);

/* ---- ablation grid ---- */

/* Trains every (variant, seed) pair on up to `jobs` worker threads and writes
 * out_dir/summary.csv. progress may be called from worker threads, one call at
 * a time. Returns GOATS_ERR_CHECK_FAILED if any run failed. */
GOATS_API goats_status goats_ablate(const goats_config* base, const char* const* variants, size_t n_variants,
                                    const uint64_t* seeds, size_t n_seeds, const char* out_dir, int jobs,
                                    goats_progress_fn progress, void* user);

/* ---- gradient check ---- */

typedef struct goats_gradcheck_options {
  uint64_t seed;
  int batches;
  double tolerance;
  int corrupt_backward; /* negative control */
} goats_gradcheck_options;

typedef struct goats_gradcheck_report {
  double max_rel_error;
  char worst[128];
  int passed;
} goats_gradcheck_report;

GOATS_API void goats_gradcheck_options_default(goats_gradcheck_options* options);
/* Returns GOATS_ERR_CHECK_FAILED (with the report filled in) when any error
 * exceeds the tolerance. progress receives one line per checked loss. */
GOATS_API goats_status goats_gradcheck(const goats_gradcheck_options* options, goats_gradcheck_report* out,
                                       goats_progress_fn progress, void* user);

/* ---- plotting ---- */

GOATS_API goats_status goats_plot(const char* runs_dir, const char* out_file);

#ifdef __cplusplus
}
#endif

#endif /* GOATS_H */
