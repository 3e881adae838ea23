#pragma once

// Soft actor-critic with twin critics, Polyak-averaged targets, and
// automatic entropy temperature. The loss functions are exposed separately
// from the update steps so gradient checks can drive them directly.

#include <span>
#include <vector>

#include "goats/replay.hpp"
#include "goats/tinynn.hpp"

namespace goats {

struct SacConfig {
  std::vector<int> hidden{256, 256};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  double gamma = 0.99;
  double tau = 0.005;
  double target_entropy = -3.0;
  double init_log_alpha = 0.0;
  double final_layer_scale = 1e-3;

  void validate() const;
};

/// Fixed affine feature scaling applied to every network input:
/// x' = (x - offset) * scale.
struct InputNormalizer {
  std::vector<double> offset;
  std::vector<double> scale;

  static InputNormalizer identity(int dim);
  void apply(Matrix& x) const;
  friend bool operator==(const InputNormalizer&, const InputNormalizer&) = default;
};

struct ActorUpdate {
  double loss = 0.0;
  double mean_log_prob = 0.0;
};

class SacAgent {
 public:
  SacAgent() = default;
  SacAgent(int input_dim, int action_dim, SacConfig config, Rng& rng);

  /// Squashed-Gaussian action; mean action when `deterministic`.
  EnvAction act(std::span<const double> input, Rng& rng, bool deterministic) const;

  double update_critics(const Batch& batch, Rng& rng);
  ActorUpdate update_actor(const Batch& batch, Rng& rng);
  /// Samples fresh actions for the batch states and steps log_alpha.
  double update_temperature(const Batch& batch, Rng& rng);
  /// Steps log_alpha from an already computed mean log-probability.
  double update_temperature(double mean_log_prob);
  void soft_update_targets();

  double alpha() const;
  int input_dim() const { return input_dim_; }
  int action_dim() const { return action_dim_; }
  const SacConfig& config() const { return config_; }

  // ---- losses --------------------------------------------------------------
  // Each takes already-normalized inputs and writes the analytic gradient
  // into `grad` when it is nonempty.

  /// Soft Bellman targets for a batch, using the given standard normal noise
  /// for the next actions.
  Vector critic_targets(const Matrix& next_inputs, const Vector& rewards, const Vector& dones,
                        const Matrix& next_noise) const;
  /// Mean of 0.5 * (Q(s, a) - y)^2 over the batch.
  static double critic_loss(const Mlp& q, const Matrix& state_actions, const Vector& targets,
                            std::span<double> grad);
  /// Mean of alpha * log pi(a|s) - min(Q1, Q2)(s, a) with reparameterized a.
  double actor_loss(const Mlp& actor_net, const Matrix& inputs, const Matrix& noise,
                    std::span<double> grad, double* mean_log_prob = nullptr) const;
  /// -log_alpha * (mean_log_prob + target_entropy).
  double temperature_loss(double log_alpha, double mean_log_prob, std::span<double> grad) const;

  Matrix normalized(const Matrix& raw_inputs) const;
  static Matrix stack_state_action(const Matrix& inputs, const Matrix& actions);

  // Parameters and optimizer state are public for checkpointing and tests.
  GaussianPolicyHead actor;
  Mlp q1, q2, q1_target, q2_target;
  double log_alpha = 0.0;
  AdamState actor_opt, q1_opt, q2_opt, alpha_opt;
  InputNormalizer normalizer;

 private:
  SacConfig config_;
  int input_dim_ = 0;
  int action_dim_ = 0;
};

/// target <- (1 - tau) * target + tau * source.
void polyak_update(const Mlp& source, Mlp& target, double tau);

}  // namespace goats
