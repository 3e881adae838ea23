#pragma once

// File-level operations behind the command-line tool: training into an
// output directory, checkpoint evaluation, the ablation grid, gradient
// checks, and plotting.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "goats/checkpoint.hpp"
#include "goats/trainer.hpp"

namespace goats {

struct TrainOutcome {
  std::string metrics_path;
  std::string best_checkpoint;
  std::string final_checkpoint;
  double best_eval_reward = 0.0;
  double best_amount_error = 0.0;
  double best_pos_success_rate = 0.0;
  int evaluations = 0;
};

/// Runs training and writes into `out_dir`:
///   config.json, metrics.csv, best.ckpt.json, final.ckpt.json and
///   checkpoints/episode_<N>.ckpt.json every training.checkpoint_every evaluations.
/// On a numerical abort it writes nan_snapshot.ckpt.json and rethrows.
TrainOutcome train_to_directory(const RunConfig& config, const std::string& out_dir);

struct AblationRow {
  std::string variant;
  int runs = 0;
  int failed = 0;
  double best_reward_mean = 0.0;
  double best_reward_se = 0.0;
  double amount_error_mean = 0.0;
  double amount_error_se = 0.0;
  double pos_success_mean = 0.0;
};

inline constexpr const char* kAblationHeader =
    "variant,runs,failed,best_eval_reward_mean,best_eval_reward_se,amount_error_mean,amount_error_se,"
    "pos_success_rate_mean,status";

using ProgressFn = std::function<void(const std::string& message)>;

/// Trains every (variant, seed) pair into out_dir/<variant>_seed<s>, on up to
/// `jobs` threads, and writes out_dir/summary.csv with rows in input variant
/// order. Rows with failed runs are flagged "partial"; the return value lists
/// them all. Results do not depend on `jobs`.
std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                                      const ProgressFn& progress = {}, int jobs = 1);

struct GradCheckEntry {
  std::string name;  // actor, q1, q2, temperature
  int batch = 0;
  double max_rel_error = 0.0;
  std::string worst_block;
};

struct GradCheckResult {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::string worst;  // "<loss>/<block>" of the largest error
  bool passed = true;
};

struct GradCheckOptions {
  std::uint64_t seed = 0;
  int batches = 10;
  int batch_size = 16;
  std::vector<int> hidden{24, 24};
  double h = 1e-5;
  double tol = 1e-4;
  /// Negative control: perturbs every analytic gradient by 1%.
  bool corrupt_backward = false;
};

/// Central-difference checks of the critic, actor and temperature losses on
/// random batches.
GradCheckResult run_gradcheck(const GradCheckOptions& options);

}  // namespace goats
