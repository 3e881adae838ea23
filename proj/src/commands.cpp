#include "goats/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "goats/config.hpp"
#include "goats/error.hpp"
#include "goats/metrics.hpp"

namespace goats {

namespace fs = std::filesystem;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create output directory " + dir.string());
}

Checkpoint make_checkpoint(const RunConfig& config, const SacAgent& agent, int episode, long env_steps) {
  Checkpoint c;
  c.config = config;
  c.episode = episode;
  c.env_steps = env_steps;
  c.seed = config.seed;
  c.agent = agent;
  return c;
}

}  // namespace

TrainOutcome train_to_directory(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  const fs::path dir(out_dir);
  ensure_directory(dir);
  ensure_directory(dir / "checkpoints");
  RunConfig echo = config;
  echo.output_dir = out_dir;
  save_run_config(echo, (dir / "config.json").string());

  TrainOutcome outcome;
  outcome.metrics_path = (dir / "metrics.csv").string();
  outcome.best_checkpoint = (dir / "best.ckpt.json").string();
  outcome.final_checkpoint = (dir / "final.ckpt.json").string();
  MetricsCsvWriter metrics(outcome.metrics_path);

  TrainingHooks hooks;
  hooks.on_eval = [&](const MetricsRow& row, const SacAgent& agent, const EvalReport& report, bool is_best) {
    metrics.append(row);
    ++outcome.evaluations;
    if (is_best) {
      save_checkpoint(make_checkpoint(echo, agent, row.episode, row.env_steps), outcome.best_checkpoint);
      outcome.best_eval_reward = report.mean_reward;
      outcome.best_amount_error = report.amount_error_mean;
      outcome.best_pos_success_rate = report.pos_success_rate;
    }
    const int every = config.training.checkpoint_every;
    if (every > 0 && outcome.evaluations % every == 0) {
      const auto path = dir / "checkpoints" / ("episode_" + std::to_string(row.episode) + ".ckpt.json");
      save_checkpoint(make_checkpoint(echo, agent, row.episode, row.env_steps), path.string());
    }
  };

  TrainResult result;
  try {
    result = run_training(config, hooks);
  } catch (const NumericalAbort& abort) {
    const auto path = dir / "nan_snapshot.ckpt.json";
    try {
      save_checkpoint(make_checkpoint(echo, abort.snapshot, abort.episode, abort.env_steps), path.string());
    } catch (const Error&) {
      // Non-finite parameters cannot be encoded; the message still names the step.
      std::ofstream(path.string() + ".txt") << abort.what() << '\n';
    }
    throw NumericalAbort(std::string(abort.what()) + "; diagnostic snapshot: " + path.string(), abort.snapshot,
                         abort.episode, abort.env_steps);
  }
  save_checkpoint(make_checkpoint(echo, result.final_agent, config.training.total_episodes, result.env_steps),
                  outcome.final_checkpoint);
  if (!result.best_agent) {
    save_checkpoint(make_checkpoint(echo, result.final_agent, 0, 0), outcome.best_checkpoint);
  }
  return outcome;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                                      const ProgressFn& progress, int jobs) {
  if (variants.empty() || seeds.empty()) fail(ErrorCode::Config, "ablation needs at least one variant and seed");
  if (jobs < 1) fail(ErrorCode::Config, "ablation needs at least one worker");
  const fs::path dir(out_dir);
  ensure_directory(dir);

  struct Job {
    Variant variant;
    std::uint64_t seed;
    std::optional<TrainOutcome> outcome;
  };
  std::vector<Job> grid;
  for (Variant v : variants) {
    for (std::uint64_t seed : seeds) grid.push_back({v, seed, std::nullopt});
  }

  std::mutex progress_mutex;
  auto say = [&](const std::string& m) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    progress(m);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      Job& job = grid[i];
      const std::string name = to_string(job.variant);
      RunConfig cfg = base;
      cfg.variant = job.variant;
      cfg.seed = job.seed;
      const auto run_dir = dir / (name + "_seed" + std::to_string(job.seed));
      say("training " + name + " seed " + std::to_string(job.seed));
      try {
        job.outcome = train_to_directory(cfg, run_dir.string());
        std::ostringstream os;
        os << "  " << name << " seed " << job.seed << ": best eval reward " << job.outcome->best_eval_reward
           << ", amount error " << job.outcome->best_amount_error;
        say(os.str());
      } catch (const std::exception& e) {
        say("  " + name + " seed " + std::to_string(job.seed) + " failed: " + e.what());
      }
    }
  };
  // Runs are independent and individually seeded, so the worker count does
  // not change any result.
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), grid.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<AblationRow> rows;
  for (Variant v : variants) {
    AblationRow row;
    row.variant = to_string(v);
    std::vector<double> rewards, errors, success;
    for (const Job& job : grid) {
      if (job.variant != v) continue;
      if (!job.outcome) {
        ++row.failed;
        continue;
      }
      ++row.runs;
      rewards.push_back(job.outcome->best_eval_reward);
      errors.push_back(job.outcome->best_amount_error);
      success.push_back(job.outcome->best_pos_success_rate);
    }
    row.best_reward_mean = mean_of(rewards);
    row.best_reward_se = se_of(rewards);
    row.amount_error_mean = mean_of(errors);
    row.amount_error_se = se_of(errors);
    row.pos_success_mean = mean_of(success);
    rows.push_back(row);
  }

  std::ofstream summary((dir / "summary.csv").string());
  if (!summary) fail(ErrorCode::Io, "cannot write ablation summary");
  summary << kAblationHeader << '\n';
  for (const auto& r : rows) {
    summary << r.variant << ',' << r.runs << ',' << r.failed << ',' << format_real(r.best_reward_mean) << ','
            << format_real(r.best_reward_se) << ',' << format_real(r.amount_error_mean) << ','
            << format_real(r.amount_error_se) << ',' << format_real(r.pos_success_mean) << ','
            << (r.failed == 0 ? "complete" : "partial") << '\n';
  }
  return rows;
}

GradCheckResult run_gradcheck(const GradCheckOptions& o) {
  Rng rng(o.seed);
  SacConfig cfg;
  cfg.hidden = o.hidden;
  // Full-scale output layers so the losses depend visibly on every block.
  cfg.final_layer_scale = 1.0;
  cfg.init_log_alpha = std::log(0.2);
  const int input_dim = policy_input_dim(2, false);
  const int action_dim = static_cast<int>(kActionDim);
  SacAgent agent(input_dim, action_dim, cfg, rng);

  GradCheckResult result;
  auto record = [&](const std::string& name, int b, const GradCheckReport& rep) {
    GradCheckEntry e{name, b, rep.max_rel_error, {}};
    double worst = -1.0;
    for (const auto& blk : rep.blocks) {
      if (blk.max_rel_error > worst) {
        worst = blk.max_rel_error;
        e.worst_block = blk.name;
      }
    }
    if (e.max_rel_error >= result.max_rel_error) {
      result.max_rel_error = e.max_rel_error;
      result.worst = name + "/" + e.worst_block;
    }
    result.entries.push_back(e);
  };
  auto corrupt = [&](std::span<double> grad) {
    if (!o.corrupt_backward) return;
    for (double& g : grad) g *= 1.01;
  };

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int b = 0; b < o.batches; ++b) {
    const Eigen::Index n = o.batch_size;
    Matrix inputs(input_dim, n), next_inputs(input_dim, n), actions(action_dim, n);
    Vector rewards(n), dones(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      for (int r = 0; r < input_dim; ++r) {
        inputs(r, c) = normal(rng);
        next_inputs(r, c) = normal(rng);
      }
      for (int r = 0; r < action_dim; ++r) actions(r, c) = 0.95 * uni(rng);
      rewards(c) = 0.5 * (uni(rng) - 1.0);
      dones(c) = uni(rng) > 0.6 ? 1.0 : 0.0;
    }
    const Matrix next_noise = standard_normal(action_dim, n, rng);
    const Matrix noise = standard_normal(action_dim, n, rng);
    const Vector targets = agent.critic_targets(next_inputs, rewards, dones, next_noise);
    const Matrix sa = SacAgent::stack_state_action(inputs, actions);

    for (int which = 0; which < 2; ++which) {
      const Mlp& base = which == 0 ? agent.q1 : agent.q2;
      const std::string name = which == 0 ? "q1" : "q2";
      LossFn loss = [&](std::span<const double> p, std::span<double> grad) {
        Mlp q = base;
        std::copy(p.begin(), p.end(), q.params().begin());
        const double l = SacAgent::critic_loss(q, sa, targets, grad);
        corrupt(grad);
        return l;
      };
      record(name, b, finite_diff_check(loss, base.params(), layer_blocks(base, name), o.h, o.tol));
    }

    {
      const Mlp& base = agent.actor.net();
      LossFn loss = [&](std::span<const double> p, std::span<double> grad) {
        Mlp net = base;
        std::copy(p.begin(), p.end(), net.params().begin());
        const double l = agent.actor_loss(net, inputs, noise, grad);
        corrupt(grad);
        return l;
      };
      record("actor", b, finite_diff_check(loss, base.params(), layer_blocks(base, "actor"), o.h, o.tol));
    }

    {
      double mean_lp = 0.0;
      agent.actor_loss(agent.actor.net(), inputs, noise, {}, &mean_lp);
      LossFn loss = [&](std::span<const double> p, std::span<double> grad) {
        const double l = agent.temperature_loss(p[0], mean_lp, grad);
        corrupt(grad);
        return l;
      };
      const double la = agent.log_alpha;
      record("temperature", b,
             finite_diff_check(loss, std::span<const double>(&la, 1), {{"log_alpha", 0, 1}}, o.h, o.tol));
    }
  }
  result.passed = result.max_rel_error <= o.tol;
  return result;
}

}  // namespace goats
