#include "goats/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

namespace goats {

namespace {

struct VariantName {
  Variant variant;
  const char* name;
};

constexpr VariantName kVariants[] = {
    {Variant::Sac, "sac"},
    {Variant::SacHer, "sac_her"},
    {Variant::SacUgs, "sac_ugs"},
    {Variant::SacPags, "sac_pags"},
    {Variant::SacHerUgs, "sac_her_ugs"},
    {Variant::SacHerPags, "sac_her_pags"},
    {Variant::Goats, "goats"},
};

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean; zero for fewer than two samples.
double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

Rng seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const char* to_string(Variant v) {
  for (const auto& e : kVariants) {
    if (e.variant == v) return e.name;
  }
  return "unknown";
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : kVariants) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

Variant variant_from_string(const std::string& name) {
  for (const auto& e : kVariants) {
    if (name == e.name) return e.variant;
  }
  std::string msg = "unknown variant '" + name + "'; valid variants:";
  for (const auto& n : variant_names()) msg += " " + n;
  fail(ErrorCode::Config, msg);
}

bool uses_her(Variant v) {
  return v == Variant::SacHer || v == Variant::SacHerUgs || v == Variant::SacHerPags ||
         v == Variant::Goats;
}

GoalConfig GoalConfig::preset(ContainerPreset preset) {
  GoalConfig g;
  const double top = preset == ContainerPreset::Bowl ? 0.40 : 0.50;
  const double bottom = preset == ContainerPreset::Bowl ? 0.27 : 0.37;
  g.initial_position = BoxDistribution({0.15, 0.03}, {0.35, 0.08});
  g.desired_position = BoxDistribution({0.15, bottom}, {0.35, top});
  g.universal_position = BoxDistribution({0.15, 0.03}, {0.35, top});
  return g;
}

DiscreteDistribution GoalConfig::initial_amount() const {
  return DiscreteDistribution::with_zero(desired_amounts, zero_amount_weight);
}

DiscreteDistribution GoalConfig::desired_amount() const {
  return DiscreteDistribution::uniform(desired_amounts);
}

void GoalConfig::validate() const {
  if (initial_position.dim() != 2 || desired_position.dim() != 2 || universal_position.dim() != 2) {
    fail(ErrorCode::Config, "goal position boxes must be two-dimensional");
  }
  initial_amount();
  desired_amount();
}

GoalDistributions make_goal_distributions(const VariantConfig& vc, TemporalFactor k) {
  const GoalConfig& g = vc.goals;
  switch (vc.variant) {
    case Variant::Sac:
    case Variant::SacHer:
      return {g.desired_position, g.desired_amount()};
    case Variant::SacUgs:
    case Variant::SacHerUgs:
      return {g.universal_position, g.initial_amount()};
    case Variant::SacPags:
    case Variant::SacHerPags:
      return {interpolate_box(g.initial_position, g.desired_position, k), g.initial_amount()};
    case Variant::Goats:
      return {interpolate_box(g.initial_position, g.desired_position, k),
              interpolate_discrete(g.initial_amount(), g.desired_amount(), k, g.interpolation)};
  }
  fail(ErrorCode::InvalidArgument, "unhandled variant");
}

void CurriculumSchedule::validate() const {
  if (!(ramp_fraction > 0.0 && ramp_fraction <= 1.0)) {
    fail(ErrorCode::Config, "curriculum.ramp_fraction must lie in (0,1]");
  }
  if (!(delta_k > 0.0 && delta_k <= 1.0)) fail(ErrorCode::Config, "curriculum.delta_k must lie in (0,1]");
  if (!(success_threshold >= 0.0 && success_threshold <= 1.0)) {
    fail(ErrorCode::Config, "curriculum.success_threshold must lie in [0,1]");
  }
  if (window < 1) fail(ErrorCode::Config, "curriculum.window must be positive");
}

double temporal_factor(const CurriculumSchedule& schedule, int episode_index, int total_episodes,
                       double rolling_success, double previous_k) {
  if (schedule.mode == ScheduleMode::Linear) {
    const double ramp = schedule.ramp_fraction * static_cast<double>(total_episodes);
    if (ramp <= 0.0) return 1.0;
    return std::min(1.0, static_cast<double>(episode_index) / ramp);
  }
  double k = std::clamp(previous_k, 0.0, 1.0);
  if (rolling_success >= schedule.success_threshold) k = std::min(1.0, k + schedule.delta_k);
  return k;
}

void TrainingConfig::validate() const {
  if (total_episodes < 0) fail(ErrorCode::Config, "training.total_episodes must be nonnegative");
  if (warmup_steps < 0) fail(ErrorCode::Config, "training.warmup_steps must be nonnegative");
  if (batch_size < 1) fail(ErrorCode::Config, "training.batch_size must be positive");
  if (update_every < 1 || updates_per_round < 0) {
    fail(ErrorCode::Config, "training.update_every must be positive, updates_per_round nonnegative");
  }
  if (eval_every < 1) fail(ErrorCode::Config, "training.eval_every must be positive");
  if (eval_episodes < 1) fail(ErrorCode::Config, "training.eval_episodes must be positive");
  if (!(epsilon > 0.0)) fail(ErrorCode::Config, "training.epsilon must be positive");
  if (checkpoint_every < 0) fail(ErrorCode::Config, "training.checkpoint_every must be nonnegative");
}

void RunConfig::validate() const {
  env.validate();
  sac.validate();
  curriculum.validate();
  goals.validate();
  training.validate();
  if (her.k_her < 0) fail(ErrorCode::Config, "her.k_her must be nonnegative");
  if (her.capacity < static_cast<std::size_t>(env.episode_len)) {
    fail(ErrorCode::Config, "her.capacity must hold at least one episode");
  }
}

InputNormalizer make_input_normalizer(const EnvConfig& env, bool append_achieved) {
  const auto& lo = env.workspace.lower();
  const auto& hi = env.workspace.upper();
  const double cx = 0.5 * (lo[0] + hi[0]), sx = 2.0 / (hi[0] - lo[0]);
  const double cy = 0.5 * (lo[1] + hi[1]), sy = 2.0 / (hi[1] - lo[1]);
  InputNormalizer n;
  // x, y, theta, vx, vy, omega, fill fraction, waterline
  n.offset = {cx, cy, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5 * env.tank_wall_height};
  n.scale = {sx, sy, 1.0 / env.theta_max, 1.0 / env.v_max, 1.0 / env.v_max, 1.0 / env.omega_max,
             2.0, 2.0 / env.tank_wall_height};
  const int goals = append_achieved ? 2 : 1;
  for (int i = 0; i < goals; ++i) {
    n.offset.insert(n.offset.end(), {cx, cy, 0.5});
    n.scale.insert(n.scale.end(), {sx, sy, 2.0});
  }
  return n;
}

SacAgent make_agent(const RunConfig& config, Rng& rng) {
  const int dim = policy_input_dim(2, config.her.append_achieved);
  SacAgent agent(dim, static_cast<int>(kActionDim), config.sac, rng);
  agent.normalizer = make_input_normalizer(config.env, config.her.append_achieved);
  return agent;
}

std::uint64_t eval_seed(std::uint64_t run_seed) { return run_seed * 0x9E3779B97F4A7C15ULL + 0xE7A1ULL; }

EvalReport evaluate(const SacAgent& agent, const EnvConfig& env, const GoalConfig& goals,
                    int n_episodes, double epsilon, Rng& rng, TraceWriter* trace) {
  if (n_episodes < 1) fail(ErrorCode::InvalidArgument, "evaluation needs at least one episode");
  const bool with_achieved = agent.input_dim() == policy_input_dim(2, true);
  const DiscreteDistribution amounts = goals.desired_amount();

  EvalReport report;
  std::vector<double> rewards, errors, reach_errors;
  int successes = 0;
  for (int e = 0; e < n_episodes; ++e) {
    EpisodeRecord rec;
    rec.desired.position = sample_position(goals.desired_position, rng);
    rec.desired.amount = sample_amount(amounts, rng);
    auto [state, obs] = reset(env, rng);
    GoalState achieved = achieved_goal(state, env);
    for (int t = 0; t < env.episode_len; ++t) {
      const auto input = policy_input(obs, rec.desired, with_achieved ? &achieved : nullptr);
      const EnvAction action = agent.act(input, rng, true);
      StepResult sr = step(state, action, env, rng);
      const double r = reward_factorized(sr.achieved, rec.desired, epsilon);
      rec.reward += r;
      if (!rec.amount_error_at_reach &&
          position_distance(sr.achieved.position, rec.desired.position) <= epsilon) {
        rec.amount_error_at_reach = std::abs(sr.achieved.amount - rec.desired.amount);
      }
      if (trace != nullptr && e == 0) trace->write(t + 1, sr.state, env, r);
      state = sr.state;
      obs = sr.obs;
      achieved = sr.achieved;
    }
    rec.final_amount = achieved.amount;
    rec.amount_error = std::abs(achieved.amount - rec.desired.amount);
    rec.position_success = position_distance(achieved.position, rec.desired.position) <= epsilon;
    rewards.push_back(rec.reward);
    errors.push_back(rec.amount_error);
    if (rec.amount_error_at_reach) reach_errors.push_back(*rec.amount_error_at_reach);
    successes += rec.position_success ? 1 : 0;
    report.episodes.push_back(std::move(rec));
  }
  report.mean_reward = mean_of(rewards);
  report.reward_se = standard_error(rewards);
  report.amount_error_mean = mean_of(errors);
  report.amount_error_se = standard_error(errors);
  report.pos_success_rate = static_cast<double>(successes) / static_cast<double>(n_episodes);
  report.amount_error_at_reach_mean = mean_of(reach_errors);
  return report;
}

TrainResult run_training(const RunConfig& config, const TrainingHooks& hooks) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const TrainingConfig& tc = config.training;
  const EnvConfig& env = config.env;

  Rng rng = seeded_rng(config.seed, 1);
  Rng init_rng = seeded_rng(config.seed, 2);
  SacAgent agent = make_agent(config, init_rng);

  HerConfig her = config.her;
  if (!uses_her(config.variant)) her.k_her = 0;
  HerBuffer buffer(her, env.episode_len);
  const VariantConfig variant{config.variant, config.goals};
  const RewardFn reward_fn = [](const GoalState& a, const GoalState& d, double eps) {
    return reward_factorized(a, d, eps);
  };

  TrainResult result;
  double k = 0.0;
  std::deque<bool> recent_success;
  double last_actor_loss = 0.0, last_critic_loss = 0.0;
  double last_episode_reward = 0.0;
  long env_steps = 0;
  bool have_best = false;

  for (int ep = 0; ep < tc.total_episodes; ++ep) {
    double rolling = 0.0;
    if (!recent_success.empty()) {
      rolling = static_cast<double>(std::count(recent_success.begin(), recent_success.end(), true)) /
                static_cast<double>(recent_success.size());
    }
    const double gate_input =
        static_cast<int>(recent_success.size()) >= config.curriculum.window ? rolling : 0.0;
    const double next_k = temporal_factor(config.curriculum, ep, tc.total_episodes, gate_input, k);
    if (config.curriculum.mode == ScheduleMode::Gated && next_k > k) recent_success.clear();
    k = std::max(k, next_k);

    const GoalDistributions dists = make_goal_distributions(variant, TemporalFactor(k));
    GoalState desired{sample_position(dists.position, rng), sample_amount(dists.amount, rng)};

    auto [state, obs] = reset(env, rng);
    GoalState achieved = achieved_goal(state, env);
    Episode episode;
    episode.reserve(static_cast<std::size_t>(env.episode_len));
    double episode_reward = 0.0;

    for (int t = 0; t < env.episode_len; ++t) {
      EnvAction action{};
      if (env_steps < tc.warmup_steps) {
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (double& a : action) a = uni(rng);
      } else {
        const auto input = policy_input(obs, desired, her.append_achieved ? &achieved : nullptr);
        action = agent.act(input, rng, false);
      }
      StepResult sr = step(state, action, env, rng);
      const double r = reward_factorized(sr.achieved, desired, tc.epsilon);
      episode_reward += r;

      Transition tr;
      tr.obs = obs;
      tr.action = action;
      tr.next_obs = sr.obs;
      tr.achieved = achieved;
      tr.achieved_next = sr.achieved;
      tr.desired = desired;
      // Episodes end on the time limit only, so no transition is terminal.
      tr.done = false;
      episode.push_back(std::move(tr));

      state = sr.state;
      obs = sr.obs;
      achieved = sr.achieved;
      ++env_steps;

      if (env_steps >= tc.warmup_steps && buffer.size() > 0 && env_steps % tc.update_every == 0) {
        for (int u = 0; u < tc.updates_per_round; ++u) {
          const Batch batch =
              buffer.sample_batch(static_cast<std::size_t>(tc.batch_size), rng, reward_fn, tc.epsilon);
          last_critic_loss = agent.update_critics(batch, rng);
          const ActorUpdate au = agent.update_actor(batch, rng);
          last_actor_loss = au.loss;
          agent.update_temperature(au.mean_log_prob);
          agent.soft_update_targets();
          if (!finite(last_critic_loss) || !finite(last_actor_loss) || !finite(agent.log_alpha)) {
            std::ostringstream os;
            os << "non-finite loss at episode " << ep << ", env step " << env_steps
               << " (critic " << last_critic_loss << ", actor " << last_actor_loss << ", log_alpha "
               << agent.log_alpha << ")";
            throw NumericalAbort(os.str(), agent, ep, env_steps);
          }
        }
      }
    }

    const bool success =
        position_distance(achieved.position, desired.position) <= tc.epsilon &&
        std::abs(achieved.amount - desired.amount) <= config.curriculum.success_amount_tolerance;
    recent_success.push_back(success);
    while (static_cast<int>(recent_success.size()) > config.curriculum.window) recent_success.pop_front();

    if (hooks.on_episode) hooks.on_episode(ep, episode, episode_reward, k);
    buffer.store_episode(std::move(episode));
    last_episode_reward = episode_reward;

    const bool eval_now = (ep + 1) % tc.eval_every == 0 || ep + 1 == tc.total_episodes;
    if (!eval_now) continue;

    Rng eval_rng = seeded_rng(eval_seed(config.seed), 0);
    EvalReport report = evaluate(agent, env, config.goals, tc.eval_episodes, tc.epsilon, eval_rng);
    MetricsRow row;
    row.episode = ep + 1;
    row.env_steps = env_steps;
    row.k = k;
    row.variant = to_string(config.variant);
    row.seed = config.seed;
    row.train_reward = last_episode_reward;
    row.eval_reward_mean = report.mean_reward;
    row.eval_reward_se = report.reward_se;
    row.amount_error_mean = report.amount_error_mean;
    row.pos_success_rate = report.pos_success_rate;
    row.actor_loss = last_actor_loss;
    row.critic_loss = last_critic_loss;
    row.alpha = agent.alpha();
    if (tc.record_wall_time) {
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    const bool is_best = !have_best || report.mean_reward > result.best_eval_reward;
    if (is_best) {
      have_best = true;
      result.best_eval_reward = report.mean_reward;
      result.best_agent = agent;
      result.best_report = report;
    }
    result.metrics.push_back(row);
    if (hooks.on_eval) hooks.on_eval(row, agent, report, is_best);
  }

  result.final_agent = std::move(agent);
  result.env_steps = env_steps;
  return result;
}

}  // namespace goats
