#include "goats/goats.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "goats/checkpoint.hpp"
#include "goats/commands.hpp"
#include "goats/config.hpp"
#include "goats/error.hpp"
#include "goats/plot.hpp"

struct goats_config {
  goats::RunConfig value;
};

struct goats_checkpoint {
  goats::Checkpoint value;
};

namespace {

thread_local std::string g_last_error;

goats_status status_for(goats::ErrorCode code) {
  using goats::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::OutOfRange:
    case ErrorCode::EmptyBuffer:
    case ErrorCode::IncompleteEpisode:
      return GOATS_ERR_INVALID_ARGUMENT;
    case ErrorCode::Config:
      return GOATS_ERR_CONFIG;
    case ErrorCode::Io:
      return GOATS_ERR_IO;
    case ErrorCode::Version:
      return GOATS_ERR_VERSION;
    case ErrorCode::Numerical:
      return GOATS_ERR_NUMERICAL;
  }
  return GOATS_ERR_INTERNAL;
}

goats_status set_error(goats_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
goats_status guarded(F&& body) {
  try {
    return body();
  } catch (const goats::Error& e) {
    return set_error(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GOATS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GOATS_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(GOATS_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define GOATS_REQUIRE(cond, msg) \
  do {                           \
    if (!(cond)) return set_error(GOATS_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

}  // namespace

extern "C" {

const char* goats_last_error(void) { return g_last_error.c_str(); }

const char* goats_status_string(goats_status status) {
  switch (status) {
    case GOATS_OK: return "ok";
    case GOATS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GOATS_ERR_CONFIG: return "configuration error";
    case GOATS_ERR_IO: return "i/o error";
    case GOATS_ERR_VERSION: return "version mismatch";
    case GOATS_ERR_NUMERICAL: return "numerical abort";
    case GOATS_ERR_CHECK_FAILED: return "check failed";
    case GOATS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* goats_variant_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : goats::variant_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

void goats_string_free(char* s) { std::free(s); }

goats_status goats_config_default(const char* preset, goats_config** out) {
  GOATS_REQUIRE(out != nullptr, "out must not be NULL");
  return guarded([&] {
    const auto p = goats::container_preset_from_string(preset != nullptr ? preset : "bowl");
    *out = new goats_config{goats::default_run_config(p)};
    return GOATS_OK;
  });
}

goats_status goats_config_load(const char* path, goats_config** out) {
  GOATS_REQUIRE(path != nullptr && out != nullptr, "path and out must not be NULL");
  return guarded([&] {
    *out = new goats_config{goats::load_run_config(path)};
    return GOATS_OK;
  });
}

goats_status goats_config_parse(const char* text, goats_config** out) {
  GOATS_REQUIRE(text != nullptr && out != nullptr, "text and out must not be NULL");
  return guarded([&] {
    *out = new goats_config{goats::run_config_from_string(text)};
    return GOATS_OK;
  });
}

goats_status goats_config_save(const goats_config* config, const char* path) {
  GOATS_REQUIRE(config != nullptr && path != nullptr, "config and path must not be NULL");
  return guarded([&] {
    goats::save_run_config(config->value, path);
    return GOATS_OK;
  });
}

goats_status goats_config_to_string(const goats_config* config, char** out) {
  GOATS_REQUIRE(config != nullptr && out != nullptr, "config and out must not be NULL");
  return guarded([&] {
    *out = copy_string(goats::run_config_to_string(config->value));
    return GOATS_OK;
  });
}

goats_status goats_config_set_variant(goats_config* config, const char* name) {
  GOATS_REQUIRE(config != nullptr && name != nullptr, "config and name must not be NULL");
  return guarded([&] {
    config->value.variant = goats::variant_from_string(name);
    return GOATS_OK;
  });
}

goats_status goats_config_set_seed(goats_config* config, uint64_t seed) {
  GOATS_REQUIRE(config != nullptr, "config must not be NULL");
  config->value.seed = seed;
  return GOATS_OK;
}

goats_status goats_config_set_output_dir(goats_config* config, const char* dir) {
  GOATS_REQUIRE(config != nullptr && dir != nullptr && *dir != '\0', "output directory must be non-empty");
  return guarded([&] {
    config->value.output_dir = dir;
    return GOATS_OK;
  });
}

goats_status goats_config_get_output_dir(const goats_config* config, char** out) {
  GOATS_REQUIRE(config != nullptr && out != nullptr, "config and out must not be NULL");
  return guarded([&] {
    *out = copy_string(config->value.output_dir);
    return GOATS_OK;
  });
}

void goats_config_free(goats_config* config) { delete config; }

goats_status goats_train(const goats_config* config, goats_train_summary* out) {
  GOATS_REQUIRE(config != nullptr, "config must not be NULL");
  return guarded([&] {
    const auto outcome = goats::train_to_directory(config->value, config->value.output_dir);
    if (out != nullptr) {
      out->best_eval_reward = outcome.best_eval_reward;
      out->best_amount_error = outcome.best_amount_error;
      out->best_pos_success_rate = outcome.best_pos_success_rate;
      out->evaluations = outcome.evaluations;
    }
    return GOATS_OK;
  });
}

goats_status goats_checkpoint_load(const char* path, goats_checkpoint** out) {
  GOATS_REQUIRE(path != nullptr && out != nullptr, "path and out must not be NULL");
  return guarded([&] {
    *out = new goats_checkpoint{goats::load_checkpoint(path)};
    return GOATS_OK;
  });
}

void goats_checkpoint_free(goats_checkpoint* ckpt) { delete ckpt; }

goats_status goats_evaluate(const goats_checkpoint* ckpt, int episodes, uint64_t seed, const char* trace_path,
                            goats_eval_report* out) {
  GOATS_REQUIRE(ckpt != nullptr && out != nullptr, "checkpoint and out must not be NULL");
  GOATS_REQUIRE(episodes >= 1, "episodes must be at least 1");
  return guarded([&] {
    const goats::RunConfig& cfg = ckpt->value.config;
    goats::Rng rng(seed);
    std::ofstream trace_file;
    std::unique_ptr<goats::TraceWriter> trace;
    if (trace_path != nullptr) {
      trace_file.open(trace_path);
      if (!trace_file) goats::fail(goats::ErrorCode::Io, std::string("cannot write trace ") + trace_path);
      trace = std::make_unique<goats::TraceWriter>(trace_file);
    }
    const auto report = goats::evaluate(ckpt->value.agent, cfg.env, cfg.goals, episodes, cfg.training.epsilon,
                                        rng, trace.get());
    out->mean_reward = report.mean_reward;
    out->reward_se = report.reward_se;
    out->amount_error_mean = report.amount_error_mean;
    out->amount_error_se = report.amount_error_se;
    out->pos_success_rate = report.pos_success_rate;
    out->amount_error_at_reach_mean = report.amount_error_at_reach_mean;
    out->episodes = episodes;
    return GOATS_OK;
  });
}

goats_status goats_ablate(const goats_config* base, const char* const* variants, size_t n_variants,
                          const uint64_t* seeds, size_t n_seeds, const char* out_dir, int jobs,
                          goats_progress_fn progress, void* user) {
  GOATS_REQUIRE(base != nullptr && out_dir != nullptr, "config and out_dir must not be NULL");
  GOATS_REQUIRE(n_variants > 0 && variants != nullptr, "at least one variant is required");
  GOATS_REQUIRE(n_seeds > 0 && seeds != nullptr, "at least one seed is required");
  GOATS_REQUIRE(jobs >= 1, "jobs must be at least 1");
  return guarded([&] {
    std::vector<goats::Variant> vs;
    for (size_t i = 0; i < n_variants; ++i) vs.push_back(goats::variant_from_string(variants[i]));
    std::vector<std::uint64_t> ss(seeds, seeds + n_seeds);
    goats::ProgressFn fn;
    if (progress != nullptr) fn = [&](const std::string& m) { progress(m.c_str(), user); };
    const auto rows = goats::run_ablation(base->value, vs, ss, out_dir, fn, jobs);
    for (const auto& r : rows) {
      if (r.failed > 0) {
        return set_error(GOATS_ERR_CHECK_FAILED, "variant " + r.variant + " had " + std::to_string(r.failed) +
                                                      " failed run(s); summary flagged partial");
      }
    }
    return GOATS_OK;
  });
}

void goats_gradcheck_options_default(goats_gradcheck_options* options) {
  if (options == nullptr) return;
  const goats::GradCheckOptions d;
  options->seed = d.seed;
  options->batches = d.batches;
  options->tolerance = d.tol;
  options->corrupt_backward = 0;
}

goats_status goats_gradcheck(const goats_gradcheck_options* options, goats_gradcheck_report* out,
                             goats_progress_fn progress, void* user) {
  GOATS_REQUIRE(options != nullptr && out != nullptr, "options and out must not be NULL");
  GOATS_REQUIRE(options->batches >= 1, "batches must be at least 1");
  return guarded([&] {
    goats::GradCheckOptions o;
    o.seed = options->seed;
    o.batches = options->batches;
    o.tol = options->tolerance;
    o.corrupt_backward = options->corrupt_backward != 0;
    const auto result = goats::run_gradcheck(o);
    if (progress != nullptr) {
      for (const auto& e : result.entries) {
        char line[256];
        std::snprintf(line, sizeof line, "batch %d %-12s max_rel_error %.3e (%s)", e.batch, e.name.c_str(),
                      e.max_rel_error, e.worst_block.c_str());
        progress(line, user);
      }
    }
    out->max_rel_error = result.max_rel_error;
    std::snprintf(out->worst, sizeof out->worst, "%s", result.worst.c_str());
    out->passed = result.passed ? 1 : 0;
    if (!result.passed) {
      return set_error(GOATS_ERR_CHECK_FAILED, "gradient check failed in " + result.worst);
    }
    return GOATS_OK;
  });
}

goats_status goats_plot(const char* runs_dir, const char* out_file) {
  GOATS_REQUIRE(runs_dir != nullptr && out_file != nullptr, "runs_dir and out_file must not be NULL");
  return guarded([&] {
    goats::plot_runs(runs_dir, out_file);
    return GOATS_OK;
  });
}

}  // extern "C"
