#include "goats/goaldist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "goats/error.hpp"

namespace goats {

namespace {

constexpr double kWeightSumTol = 1e-12;

void check_finite_fraction(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    std::ostringstream os;
    os << what << " must be a fraction in [0,1], got " << v;
    fail(ErrorCode::OutOfRange, os.str());
  }
}

// Pairs the two quantile functions piece by piece. Calls emit(x_p, x_q, mass)
// for every piece of positive mass, in increasing quantile order.
template <typename Emit>
void match_quantiles(const DiscreteDistribution& p, const DiscreteDistribution& q, Emit emit) {
  const auto& xp = p.support();
  const auto& wp = p.weights();
  const auto& xq = q.support();
  const auto& wq = q.weights();
  std::size_t i = 0, j = 0;
  double rp = wp[0], rq = wq[0];
  constexpr double kExhausted = 1e-15;
  while (i < xp.size() && j < xq.size()) {
    const double m = std::min(rp, rq);
    if (m > 0.0) emit(xp[i], xq[j], m);
    rp -= m;
    rq -= m;
    if (rp <= kExhausted) {
      if (++i < xp.size()) rp = wp[i];
    }
    if (rq <= kExhausted) {
      if (++j < xq.size()) rq = wq[j];
    }
  }
}

}  // namespace

void GoalState::validate() const {
  for (double v : position) {
    if (!std::isfinite(v)) fail(ErrorCode::OutOfRange, "goal position must be finite");
  }
  check_finite_fraction(amount, "goal amount");
}

BoxDistribution::BoxDistribution(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    fail(ErrorCode::DimensionMismatch, "box bounds have different dimensions");
  }
  if (lower_.empty()) fail(ErrorCode::InvalidArgument, "box must have at least one dimension");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
      fail(ErrorCode::InvalidArgument, "box bounds must be finite");
    }
    if (lower_[i] > upper_[i]) {
      std::ostringstream os;
      os << "box lower bound exceeds upper bound in dimension " << i;
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty()) fail(ErrorCode::InvalidArgument, "discrete distribution needs support");
  if (support_.size() != weights_.size()) {
    fail(ErrorCode::DimensionMismatch, "support and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    check_finite_fraction(support_[i], "support value");
    if (i > 0 && !(support_[i] > support_[i - 1])) {
      fail(ErrorCode::InvalidArgument, "support must be strictly increasing");
    }
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      fail(ErrorCode::InvalidArgument, "weights must be nonnegative");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights must sum to 1, got " << total;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

DiscreteDistribution DiscreteDistribution::uniform(std::vector<double> support) {
  std::sort(support.begin(), support.end());
  const double w = 1.0 / static_cast<double>(support.size());
  std::vector<double> weights(support.size(), w);
  return {std::move(support), std::move(weights)};
}

DiscreteDistribution DiscreteDistribution::with_zero(std::vector<double> amounts,
                                                     double zero_weight) {
  check_finite_fraction(zero_weight, "zero-amount weight");
  std::sort(amounts.begin(), amounts.end());
  if (amounts.empty() || amounts.front() <= 0.0) {
    fail(ErrorCode::InvalidArgument, "desired amounts must be positive and nonempty");
  }
  const double w = (1.0 - zero_weight) / static_cast<double>(amounts.size());
  std::vector<double> support{0.0};
  std::vector<double> weights{zero_weight};
  for (double a : amounts) {
    support.push_back(a);
    weights.push_back(w);
  }
  return {std::move(support), std::move(weights)};
}

DiscreteDistribution DiscreteDistribution::point(double value) { return {{value}, {1.0}}; }

double DiscreteDistribution::weight_of(double value) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), value);
  if (it == support_.end() || *it != value) return 0.0;
  return weights_[static_cast<std::size_t>(it - support_.begin())];
}

double DiscreteDistribution::mean() const {
  return std::inner_product(support_.begin(), support_.end(), weights_.begin(), 0.0);
}

TemporalFactor::TemporalFactor(double k) : k_(k) {
  if (!(k >= 0.0 && k <= 1.0)) {
    std::ostringstream os;
    os << "temporal factor must lie in [0,1], got " << k;
    fail(ErrorCode::OutOfRange, os.str());
  }
}

BoxDistribution interpolate_box(const BoxDistribution& rho0, const BoxDistribution& rhog,
                                TemporalFactor k) {
  if (rho0.dim() != rhog.dim()) {
    fail(ErrorCode::DimensionMismatch, "interpolated boxes have different dimensions");
  }
  const double t = k.value();
  std::vector<double> lo(rho0.dim()), hi(rho0.dim());
  for (std::size_t i = 0; i < rho0.dim(); ++i) {
    lo[i] = (1.0 - t) * rho0.lower()[i] + t * rhog.lower()[i];
    hi[i] = (1.0 - t) * rho0.upper()[i] + t * rhog.upper()[i];
    // Rounding can break lower <= upper on near-degenerate boxes.
    if (lo[i] > hi[i]) hi[i] = lo[i];
  }
  return {std::move(lo), std::move(hi)};
}

DiscreteDistribution interpolate_discrete(const DiscreteDistribution& rho0,
                                          const DiscreteDistribution& rhog, TemporalFactor k,
                                          InterpolationMode mode) {
  const double t = k.value();
  std::vector<double> support, weights;

  if (mode == InterpolationMode::Mixture) {
    std::size_t i = 0, j = 0;
    const auto& x0 = rho0.support();
    const auto& xg = rhog.support();
    while (i < x0.size() || j < xg.size()) {
      double x, w;
      if (j == xg.size() || (i < x0.size() && x0[i] < xg[j])) {
        x = x0[i];
        w = (1.0 - t) * rho0.weights()[i] + t * 0.0;
        ++i;
      } else if (i == x0.size() || xg[j] < x0[i]) {
        x = xg[j];
        w = (1.0 - t) * 0.0 + t * rhog.weights()[j];
        ++j;
      } else {
        x = x0[i];
        w = (1.0 - t) * rho0.weights()[i] + t * rhog.weights()[j];
        ++i;
        ++j;
      }
      if (w > 0.0) {
        support.push_back(x);
        weights.push_back(w);
      }
    }
    return {std::move(support), std::move(weights)};
  }

  if (t == 0.0) return rho0;
  if (t == 1.0) return rhog;
  match_quantiles(rho0, rhog, [&](double a, double b, double m) {
    const double x = (1.0 - t) * a + t * b;
    if (!support.empty() && x <= support.back()) {
      weights.back() += m;
    } else {
      support.push_back(x);
      weights.push_back(m);
    }
  });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return {std::move(support), std::move(weights)};
}

std::vector<double> sample_position(const BoxDistribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(dist.dim());
  for (std::size_t i = 0; i < dist.dim(); ++i) {
    const double lo = dist.lower()[i];
    const double hi = dist.upper()[i];
    out[i] = lo + (hi - lo) * unit(rng);
    out[i] = std::clamp(out[i], lo, hi);
  }
  return out;
}

double sample_amount(const DiscreteDistribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    cum += dist.weights()[i];
    if (u < cum) return dist.support()[i];
  }
  // u landed in the rounding gap above the last cumulative weight.
  for (std::size_t i = dist.size(); i-- > 0;) {
    if (dist.weights()[i] > 0.0) return dist.support()[i];
  }
  return dist.support().back();
}

double wasserstein2_1d(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  double acc = 0.0;
  match_quantiles(p, q, [&](double a, double b, double m) { acc += m * (a - b) * (a - b); });
  return std::sqrt(std::max(acc, 0.0));
}

double wasserstein2_1d(Interval p, Interval q, int n_quantiles) {
  if (n_quantiles < 100) fail(ErrorCode::InvalidArgument, "n_quantiles must be at least 100");
  double acc = 0.0;
  const double n = static_cast<double>(n_quantiles);
  for (int i = 0; i < n_quantiles; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / n;
    const double a = p.lo + u * (p.hi - p.lo);
    const double b = q.lo + u * (q.hi - q.lo);
    acc += (a - b) * (a - b);
  }
  return std::sqrt(acc / n);
}

double wasserstein2_box(const BoxDistribution& p, const BoxDistribution& q, int n_quantiles) {
  if (p.dim() != q.dim()) fail(ErrorCode::DimensionMismatch, "boxes differ in dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double w = wasserstein2_1d(Interval{p.lower()[i], p.upper()[i]},
                                     Interval{q.lower()[i], q.upper()[i]}, n_quantiles);
    acc += w * w;
  }
  return std::sqrt(acc);
}

double position_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "positions differ in dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

double reward_factorized(const GoalState& achieved, const GoalState& desired, double epsilon) {
  const bool reached = position_distance(achieved.position, desired.position) <= epsilon;
  if (!reached) return -1.0;
  return (1.0 - std::abs(achieved.amount - desired.amount)) - 1.0;
}

double reward_sparse(const GoalState& achieved, const GoalState& desired, double epsilon_pos,
                     double epsilon_amt) {
  const bool pos_ok = position_distance(achieved.position, desired.position) <= epsilon_pos;
  const bool amt_ok = std::abs(achieved.amount - desired.amount) <= epsilon_amt;
  return (pos_ok && amt_ok) ? 0.0 : -1.0;
}

}  // namespace goats
