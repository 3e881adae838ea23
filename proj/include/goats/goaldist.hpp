#pragma once

// Goal-distribution algebra for the curriculum: uniform boxes over container
// positions, finite distributions over fill fractions, their Wasserstein
// geodesic interpolation, sampling, and the goal-conditioned rewards.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace goats {

using Rng = std::mt19937_64;

/// Desired or achieved goal: container position (meters) and fill fraction.
struct GoalState {
  std::vector<double> position;
  double amount = 0.0;

  /// Throws Error(OutOfRange) on a non-finite position or amount outside [0,1].
  void validate() const;
};

/// Uniform distribution on the axis-aligned box [lower, upper].
class BoxDistribution {
 public:
  BoxDistribution() = default;
  BoxDistribution(std::vector<double> lower, std::vector<double> upper);

  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  std::size_t dim() const { return lower_.size(); }

  friend bool operator==(const BoxDistribution&, const BoxDistribution&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Finite distribution over fill fractions. Support is strictly increasing
/// inside [0,1]; weights are nonnegative and sum to one within 1e-12.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  DiscreteDistribution(std::vector<double> support, std::vector<double> weights);

  /// Equal weight on every value.
  static DiscreteDistribution uniform(std::vector<double> support);
  /// Mass `zero_weight` on 0.0, the rest spread equally over `amounts`.
  static DiscreteDistribution with_zero(std::vector<double> amounts, double zero_weight);
  static DiscreteDistribution point(double value);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }

  /// Probability of exactly `value` (0 when absent).
  double weight_of(double value) const;
  double mean() const;

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

/// Curriculum progress in [0,1].
class TemporalFactor {
 public:
  explicit TemporalFactor(double k);
  double value() const { return k_; }

 private:
  double k_;
};

enum class InterpolationMode {
  Mixture,       // convex combination of weights on the union support
  Displacement,  // quantile interpolation, the exact 1-D W2 geodesic
};

/// Closed-form W2 geodesic between uniform boxes: both corners move linearly.
BoxDistribution interpolate_box(const BoxDistribution& rho0, const BoxDistribution& rhog,
                                TemporalFactor k);

DiscreteDistribution interpolate_discrete(const DiscreteDistribution& rho0,
                                          const DiscreteDistribution& rhog, TemporalFactor k,
                                          InterpolationMode mode = InterpolationMode::Mixture);

std::vector<double> sample_position(const BoxDistribution& dist, Rng& rng);
double sample_amount(const DiscreteDistribution& dist, Rng& rng);

/// 1-D uniform law on [lo, hi] (lo == hi is a point mass).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Exact W2 between finite 1-D distributions by sorted quantile matching.
double wasserstein2_1d(const DiscreteDistribution& p, const DiscreteDistribution& q);
/// W2 between 1-D uniforms by midpoint quadrature of the quantile difference.
/// Requires n_quantiles >= 100.
double wasserstein2_1d(Interval p, Interval q, int n_quantiles);
/// Per-dimension quantile W2 combined in quadrature (exact for product uniforms).
double wasserstein2_box(const BoxDistribution& p, const BoxDistribution& q, int n_quantiles);

/// 1(|dp| <= epsilon) * (1 - |da|) - 1, in [-1, 0].
double reward_factorized(const GoalState& achieved, const GoalState& desired, double epsilon);
/// 0 when both position and amount are within tolerance, else -1.
double reward_sparse(const GoalState& achieved, const GoalState& desired, double epsilon_pos,
                     double epsilon_amt);

double position_distance(std::span<const double> a, std::span<const double> b);

}  // namespace goats
