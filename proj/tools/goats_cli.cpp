// goats: command-line front end over the C API.
//
//   goats train     --config PATH --variant NAME --seed N --out DIR
//   goats eval      --checkpoint PATH --episodes N --seed N [--trace FILE]
//   goats ablate    --config PATH --variants a,b --seeds 0,1,2 --out DIR [--jobs N]
//   goats gradcheck [--seed N] [--batches N] [--corrupt-backward]
//   goats plot      --runs DIR --out FILE.svg
//   goats config    [--preset bowl|bucket]
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 numerical abort.

#include <cstdio>
#include <cstdlib>
#include <malloc.h>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "goats/goats.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(goats_status s) {
  switch (s) {
    case GOATS_OK: return kExitOk;
    case GOATS_ERR_CHECK_FAILED: return kExitCheck;
    case GOATS_ERR_NUMERICAL: return kExitNumerical;
    default: return kExitUsage;
  }
}

int report(goats_status s, const char* what) {
  if (s != GOATS_OK) std::cerr << "goats " << what << ": " << goats_last_error() << '\n';
  return exit_code_for(s);
}

struct ConfigHandle {
  goats_config* ptr = nullptr;
  ~ConfigHandle() { goats_config_free(ptr); }
};

struct CheckpointHandle {
  goats_checkpoint* ptr = nullptr;
  ~CheckpointHandle() { goats_checkpoint_free(ptr); }
};

goats_status load_config(const std::string& path, const std::string& preset, ConfigHandle& cfg) {
  if (!path.empty()) return goats_config_load(path.c_str(), &cfg.ptr);
  return goats_config_default(preset.c_str(), &cfg.ptr);
}

std::string output_dir_of(const goats_config* cfg) {
  char* s = nullptr;
  if (goats_config_get_output_dir(cfg, &s) != GOATS_OK) return {};
  std::string out(s);
  goats_string_free(s);
  return out;
}

void print_progress(const char* message, void*) {
  std::cout << message << '\n';
  std::cout.flush();
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string preset = "bowl";
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  ConfigHandle cfg;
  if (auto s = load_config(a.config, a.preset, cfg); s != GOATS_OK) return report(s, "train");
  if (!a.variant.empty()) {
    if (auto s = goats_config_set_variant(cfg.ptr, a.variant.c_str()); s != GOATS_OK) return report(s, "train");
  }
  if (a.seed) goats_config_set_seed(cfg.ptr, *a.seed);
  if (const char* env = std::getenv("GOATS_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    goats_config_set_output_dir(cfg.ptr, env);
  }
  if (!a.out.empty()) {
    if (auto s = goats_config_set_output_dir(cfg.ptr, a.out.c_str()); s != GOATS_OK) return report(s, "train");
  }

  goats_train_summary summary{};
  const goats_status s = goats_train(cfg.ptr, &summary);
  if (s != GOATS_OK) return report(s, "train");
  std::cout << "output: " << output_dir_of(cfg.ptr) << '\n'
            << "evaluations: " << summary.evaluations << '\n'
            << "best eval reward: " << summary.best_eval_reward << '\n'
            << "amount error at best: " << summary.best_amount_error << '\n'
            << "position success at best: " << summary.best_pos_success_rate << '\n';
  return kExitOk;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  int episodes = 100;
  std::uint64_t seed = 0;
  std::string trace;
};

int cmd_eval(const EvalArgs& a) {
  CheckpointHandle ckpt;
  if (auto s = goats_checkpoint_load(a.checkpoint.c_str(), &ckpt.ptr); s != GOATS_OK) return report(s, "eval");
  goats_eval_report r{};
  const goats_status s =
      goats_evaluate(ckpt.ptr, a.episodes, a.seed, a.trace.empty() ? nullptr : a.trace.c_str(), &r);
  if (s != GOATS_OK) return report(s, "eval");

  char buf[512];
  std::snprintf(buf, sizeof buf,
                "episodes: %d\nmean reward: %.4f +- %.4f\namount error: %.4f +- %.4f\nposition success rate: %.4f\n",
                r.episodes, r.mean_reward, r.reward_se, r.amount_error_mean, r.amount_error_se, r.pos_success_rate);
  std::cout << buf;
  std::snprintf(buf, sizeof buf,
                "RESULT episodes=%d mean_reward=%.17g reward_se=%.17g amount_error_mean=%.17g "
                "amount_error_se=%.17g pos_success_rate=%.17g\n",
                r.episodes, r.mean_reward, r.reward_se, r.amount_error_mean, r.amount_error_se, r.pos_success_rate);
  std::cout << buf;
  return kExitOk;
}

// --- ablate --------------------------------------------------------------

struct AblateArgs {
  std::string config;
  std::string preset = "bowl";
  std::vector<std::string> variants;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string out;
  int jobs = 1;
};

int cmd_ablate(AblateArgs a) {
  ConfigHandle cfg;
  if (auto s = load_config(a.config, a.preset, cfg); s != GOATS_OK) return report(s, "ablate");
  if (a.variants.empty()) {
    std::string all = goats_variant_names();
    for (size_t start = 0;;) {
      const size_t comma = all.find(',', start);
      a.variants.push_back(all.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  std::string out = a.out;
  if (out.empty()) {
    if (const char* env = std::getenv("GOATS_OUTPUT_DIR"); env != nullptr && *env != '\0') out = env;
  }
  if (out.empty()) out = output_dir_of(cfg.ptr);

  std::vector<const char*> names;
  for (const auto& v : a.variants) names.push_back(v.c_str());
  const goats_status s = goats_ablate(cfg.ptr, names.data(), names.size(), a.seeds.data(), a.seeds.size(),
                                      out.c_str(), a.jobs, print_progress, nullptr);
  if (s == GOATS_OK) std::cout << "summary: " << out << "/summary.csv\n";
  return report(s, "ablate");
}

// --- gradcheck -----------------------------------------------------------

int cmd_gradcheck(std::uint64_t seed, int batches, bool corrupt) {
  goats_gradcheck_options o;
  goats_gradcheck_options_default(&o);
  o.seed = seed;
  o.batches = batches;
  o.corrupt_backward = corrupt ? 1 : 0;
  goats_gradcheck_report r{};
  const goats_status s = goats_gradcheck(&o, &r, print_progress, nullptr);
  if (s == GOATS_OK || s == GOATS_ERR_CHECK_FAILED) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "max relative error %.3e in %s (tolerance %.0e): %s\n", r.max_rel_error,
                  r.worst, o.tolerance, r.passed ? "PASS" : "FAIL");
    std::cout << buf;
  }
  return report(s, "gradcheck");
}

}  // namespace

int main(int argc, char** argv) {
  // Keep training-sized Eigen temporaries on the heap instead of fresh mmaps.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);

  CLI::App app{"GOATS curriculum RL for water scooping on a 2D surrogate"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train one variant/seed into an output directory");
  t->add_option("--config", train.config, "run configuration (JSON)");
  t->add_option("--preset", train.preset, "container preset when no config is given")
      ->check(CLI::IsMember({"bowl", "bucket"}));
  t->add_option("--variant", train.variant, std::string("one of ") + goats_variant_names());
  t->add_option("--seed", train.seed, "random seed");
  t->add_option("--out", train.out, "output directory (overrides config and GOATS_OUTPUT_DIR)");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint with the deterministic policy");
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  e->add_option("--episodes", eval.episodes, "number of episodes")->check(CLI::PositiveNumber);
  e->add_option("--seed", eval.seed, "evaluation seed");
  e->add_option("--trace", eval.trace, "write a per-step CSV trace of the first episode");

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "train a variant x seed grid and summarise it");
  ab->add_option("--config", ablate.config, "base run configuration (JSON)");
  ab->add_option("--preset", ablate.preset, "container preset when no config is given")
      ->check(CLI::IsMember({"bowl", "bucket"}));
  ab->add_option("--variants", ablate.variants, "comma-separated variants (default: all)")->delimiter(',');
  ab->add_option("--seeds", ablate.seeds, "comma-separated seeds")->delimiter(',');
  ab->add_option("--out", ablate.out, "output directory");
  ab->add_option("--jobs", ablate.jobs, "parallel training runs")->check(CLI::PositiveNumber);

  std::uint64_t gc_seed = 0;
  int gc_batches = 10;
  bool gc_corrupt = false;
  auto* g = app.add_subcommand("gradcheck", "finite-difference check of the SAC losses");
  g->add_option("--seed", gc_seed, "random seed");
  g->add_option("--batches", gc_batches, "number of random batches")->check(CLI::PositiveNumber);
  g->add_flag("--corrupt-backward", gc_corrupt, "negative control: perturb analytic gradients by 1%");

  std::string plot_runs, plot_out;
  auto* p = app.add_subcommand("plot", "learning-curve SVG from metrics.csv files");
  p->add_option("--runs", plot_runs, "directory searched recursively for metrics.csv")->required();
  p->add_option("--out", plot_out, "output SVG file")->required();

  std::string cfg_preset = "bowl";
  auto* c = app.add_subcommand("config", "print the default run configuration");
  c->add_option("--preset", cfg_preset, "container preset")->check(CLI::IsMember({"bowl", "bucket"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitUsage;
  }

  if (t->parsed()) return cmd_train(train);
  if (e->parsed()) return cmd_eval(eval);
  if (ab->parsed()) return cmd_ablate(ablate);
  if (g->parsed()) return cmd_gradcheck(gc_seed, gc_batches, gc_corrupt);
  if (p->parsed()) return report(goats_plot(plot_runs.c_str(), plot_out.c_str()), "plot");
  if (c->parsed()) {
    ConfigHandle cfg;
    if (auto s = goats_config_default(cfg_preset.c_str(), &cfg.ptr); s != GOATS_OK) return report(s, "config");
    char* text = nullptr;
    if (auto s = goats_config_to_string(cfg.ptr, &text); s != GOATS_OK) return report(s, "config");
    std::cout << text;
    goats_string_free(text);
    return kExitOk;
  }
  return kExitUsage;
}
