#pragma once

// Curriculum training loop: temporal-factor schedule, per-variant goal
// distributions, SAC (+HER) updates, and the evaluation protocol.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "goats/error.hpp"
#include "goats/goaldist.hpp"
#include "goats/replay.hpp"
#include "goats/sac.hpp"
#include "goats/scoopenv.hpp"

namespace goats {

enum class Variant { Sac, SacHer, SacUgs, SacPags, SacHerUgs, SacHerPags, Goats };

const char* to_string(Variant v);
/// Throws Error(Config) listing the valid names.
Variant variant_from_string(const std::string& name);
const std::vector<std::string>& variant_names();
bool uses_her(Variant v);

/// Endpoint goal distributions for the curriculum.
struct GoalConfig {
  BoxDistribution initial_position;    // near the tank bottom
  BoxDistribution desired_position;    // target region above the tank
  BoxDistribution universal_position;  // covers both, for the *_ugs baselines
  std::vector<double> desired_amounts{0.60, 0.65, 0.70, 0.75, 0.80};
  double zero_amount_weight = 0.5;
  InterpolationMode interpolation = InterpolationMode::Mixture;

  static GoalConfig preset(ContainerPreset preset);
  DiscreteDistribution initial_amount() const;
  DiscreteDistribution desired_amount() const;
  void validate() const;
};

struct VariantConfig {
  Variant variant = Variant::Goats;
  GoalConfig goals;
  bool her() const { return uses_her(variant); }
};

struct GoalDistributions {
  BoxDistribution position;
  DiscreteDistribution amount;
};

GoalDistributions make_goal_distributions(const VariantConfig& variant, TemporalFactor k);

enum class ScheduleMode { Linear, Gated };

struct CurriculumSchedule {
  ScheduleMode mode = ScheduleMode::Linear;
  double ramp_fraction = 0.5;       // linear
  double delta_k = 0.05;            // gated
  double success_threshold = 0.5;   // gated
  int window = 20;                  // gated
  double success_amount_tolerance = 0.1;

  void validate() const;
};

/// Linear: min(1, episode / (ramp_fraction * total)). Gated: previous_k
/// plus delta_k when the rolling success rate reaches the threshold.
double temporal_factor(const CurriculumSchedule& schedule, int episode_index, int total_episodes,
                       double rolling_success, double previous_k);

struct TrainingConfig {
  int total_episodes = 2000;
  int warmup_steps = 1000;
  int batch_size = 256;
  int update_every = 1;       // env steps between update rounds
  int updates_per_round = 1;
  int eval_every = 50;        // episodes
  int eval_episodes = 100;
  double epsilon = 0.03;      // position tolerance, m
  int checkpoint_every = 10;  // evaluations between periodic checkpoints; 0 disables
  bool record_wall_time = false;

  void validate() const;
};

struct RunConfig {
  EnvConfig env;
  SacConfig sac;
  HerConfig her;
  CurriculumSchedule curriculum;
  GoalConfig goals = GoalConfig::preset(ContainerPreset::Bowl);
  TrainingConfig training;
  Variant variant = Variant::Goats;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";

  void validate() const;
};

/// Feature scaling derived from the environment geometry.
InputNormalizer make_input_normalizer(const EnvConfig& env, bool append_achieved);

SacAgent make_agent(const RunConfig& config, Rng& rng);

struct EpisodeRecord {
  GoalState desired;
  double reward = 0.0;        // sum of per-step rewards
  double final_amount = 0.0;
  double amount_error = 0.0;  // at the final step
  bool position_success = false;
  /// Amount error at the first step within epsilon of the position goal.
  std::optional<double> amount_error_at_reach;
};

struct EvalReport {
  double mean_reward = 0.0;
  double reward_se = 0.0;
  double amount_error_mean = 0.0;
  double amount_error_se = 0.0;
  double pos_success_rate = 0.0;
  double amount_error_at_reach_mean = 0.0;  // over episodes that reached
  std::vector<EpisodeRecord> episodes;
};

/// Deterministic-policy evaluation against the desired goal distributions.
EvalReport evaluate(const SacAgent& agent, const EnvConfig& env, const GoalConfig& goals,
                    int n_episodes, double epsilon, Rng& rng, TraceWriter* trace = nullptr);

struct MetricsRow {
  int episode = 0;
  long env_steps = 0;
  double k = 0.0;
  std::string variant;
  std::uint64_t seed = 0;
  double train_reward = 0.0;
  double eval_reward_mean = 0.0;
  double eval_reward_se = 0.0;
  double amount_error_mean = 0.0;
  double pos_success_rate = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double alpha = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingHooks {
  /// After each evaluation; `is_best` when it set a new best eval reward.
  std::function<void(const MetricsRow&, const SacAgent&, const EvalReport&, bool is_best)> on_eval;
  /// After each training episode is stored.
  std::function<void(int episode, const Episode&, double episode_reward, double k)> on_episode;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  SacAgent final_agent;
  std::optional<SacAgent> best_agent;
  std::optional<EvalReport> best_report;
  double best_eval_reward = 0.0;
  long env_steps = 0;
};

/// Raised when a loss turns NaN/Inf; carries the agent at the failing step.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, SacAgent snapshot, int episode, long env_steps)
      : Error(ErrorCode::Numerical, what), snapshot(std::move(snapshot)), episode(episode),
        env_steps(env_steps) {}
  SacAgent snapshot;
  int episode;
  long env_steps;
};

TrainResult run_training(const RunConfig& config, const TrainingHooks& hooks = {});

/// Seed for the fixed evaluation episode set of a run.
std::uint64_t eval_seed(std::uint64_t run_seed);

}  // namespace goats
