#include "doctest.h"

#include <cmath>
#include <map>

#include "goats/error.hpp"
#include "goats/goaldist.hpp"
#include "oracles.hpp"

using namespace goats;

namespace {

BoxDistribution random_box(Rng& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.0, 0.8);
  std::vector<double> lo(dim), hi(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    lo[d] = u(rng);
    hi[d] = lo[d] + w(rng);
  }
  return {lo, hi};
}

DiscreteDistribution random_discrete(Rng& rng) {
  std::uniform_int_distribution<int> n_atoms(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<double, double> atoms;
  const int n = n_atoms(rng);
  while (static_cast<int>(atoms.size()) < n) atoms[std::round(u(rng) * 1000.0) / 1000.0] = 0.05 + u(rng);
  std::vector<double> s, w;
  double total = 0.0;
  for (auto [v, m] : atoms) total += m;
  for (auto [v, m] : atoms) {
    s.push_back(v);
    w.push_back(m / total);
  }
  // Push the rounding residue into the last atom so the sum is 1 to 1e-15.
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) rest -= w[i];
  w.back() = rest;
  return {s, w};
}

std::vector<std::pair<double, double>> atoms_of(const DiscreteDistribution& d) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.emplace_back(d.support()[i], d.weights()[i]);
  return out;
}

}  // namespace

TEST_CASE("box and discrete constructors validate their invariants") {
  CHECK_THROWS_AS(BoxDistribution({0.0, 0.0}, {1.0}), Error);
  CHECK_THROWS_AS(BoxDistribution({0.5}, {0.4}), Error);
  CHECK_THROWS_AS(BoxDistribution({NAN}, {1.0}), Error);
  CHECK_NOTHROW(BoxDistribution({0.3}, {0.3}));

  CHECK_THROWS_AS(DiscreteDistribution({0.2, 0.1}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(DiscreteDistribution({0.1, 0.1}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(DiscreteDistribution({0.1, 1.2}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(DiscreteDistribution({0.1, 0.2}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(DiscreteDistribution({0.1, 0.2}, {1.5, -0.5}), Error);
  CHECK_THROWS_AS(DiscreteDistribution({}, {}), Error);

  CHECK_THROWS_AS(TemporalFactor(-0.01), Error);
  CHECK_THROWS_AS(TemporalFactor(1.01), Error);
  CHECK_THROWS_AS(TemporalFactor(NAN), Error);
  CHECK(TemporalFactor(0.0).value() == 0.0);
  CHECK(TemporalFactor(1.0).value() == 1.0);
}

TEST_CASE("with_zero and uniform build the amount endpoints") {
  const auto init = DiscreteDistribution::with_zero({0.6, 0.65, 0.7, 0.75, 0.8}, 0.5);
  CHECK(init.size() == 6);
  CHECK(init.weight_of(0.0) == 0.5);
  CHECK(init.weight_of(0.7) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(init.weight_of(0.33) == 0.0);
  const auto goal = DiscreteDistribution::uniform({0.6, 0.65, 0.7, 0.75, 0.8});
  CHECK(goal.weight_of(0.0) == 0.0);
  CHECK(goal.mean() == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("box interpolation moves both corners linearly") {
  const BoxDistribution a({0.15, 0.03}, {0.35, 0.08});
  const BoxDistribution g({0.15, 0.27}, {0.35, 0.40});
  CHECK(interpolate_box(a, g, TemporalFactor(0.0)) == a);
  CHECK(interpolate_box(a, g, TemporalFactor(1.0)) == g);
  const auto mid = interpolate_box(a, g, TemporalFactor(0.25));
  CHECK(mid.lower()[1] == doctest::Approx(0.75 * 0.03 + 0.25 * 0.27));
  CHECK(mid.upper()[1] == doctest::Approx(0.75 * 0.08 + 0.25 * 0.40));
  CHECK_THROWS_AS(interpolate_box(a, BoxDistribution({0.0}, {1.0}), TemporalFactor(0.5)), Error);
}

TEST_CASE("uniform W2 quadrature agrees with the closed form") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double a0 = u(rng), a1 = u(rng), b0 = u(rng), b1 = u(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    const double exact = oracle::w2_uniform(a0, a1, b0, b1);
    const double quad = wasserstein2_1d(Interval{a0, a1}, Interval{b0, b1}, 10000);
    CHECK(quad == doctest::Approx(exact).epsilon(1e-6));
  }
  CHECK_THROWS_AS(wasserstein2_1d(Interval{0, 1}, Interval{0, 1}, 50), Error);
}

TEST_CASE("box geodesic: W2 from the start scales with k") {
  Rng rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const auto a = random_box(rng, dim), g = random_box(rng, dim);
    const double total = oracle::w2_box(a.lower(), a.upper(), g.lower(), g.upper());
    for (double k : {0.25, 0.5, 0.75}) {
      const auto mid = interpolate_box(a, g, TemporalFactor(k));
      const double d = oracle::w2_box(a.lower(), a.upper(), mid.lower(), mid.upper());
      CHECK(std::abs(d - k * total) <= 1e-9 * std::max(1.0, total));
      const double lib = wasserstein2_box(a, mid, 10000);
      CHECK(std::abs(lib - k * total) <= 1e-3 * total + 1e-12);
    }
  }
}

TEST_CASE("discrete W2 matches the breakpoint oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_discrete(rng), q = random_discrete(rng);
    CHECK(wasserstein2_1d(p, q) == doctest::Approx(oracle::w2_discrete(atoms_of(p), atoms_of(q))).epsilon(1e-12));
  }
  const auto p = DiscreteDistribution::point(0.2), q = DiscreteDistribution::point(0.7);
  CHECK(wasserstein2_1d(p, q) == doctest::Approx(0.5));
}

TEST_CASE("displacement interpolation is the discrete W2 geodesic") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_discrete(rng), g = random_discrete(rng);
    const double total = oracle::w2_discrete(atoms_of(a), atoms_of(g));
    for (double k : {0.25, 0.5, 0.75}) {
      const auto mid = interpolate_discrete(a, g, TemporalFactor(k), InterpolationMode::Displacement);
      const double d0 = oracle::w2_discrete(atoms_of(a), atoms_of(mid));
      const double d1 = oracle::w2_discrete(atoms_of(mid), atoms_of(g));
      CHECK(std::abs(d0 - k * total) <= 1e-6);
      CHECK(std::abs(d1 - (1.0 - k) * total) <= 1e-6);
    }
  }
}

TEST_CASE("interpolation endpoints are exact in both modes") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_discrete(rng), g = random_discrete(rng);
    for (auto mode : {InterpolationMode::Mixture, InterpolationMode::Displacement}) {
      const auto at0 = interpolate_discrete(a, g, TemporalFactor(0.0), mode);
      const auto at1 = interpolate_discrete(a, g, TemporalFactor(1.0), mode);
      REQUIRE(at0.size() == a.size());
      REQUIRE(at1.size() == g.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(at0.support()[i] - a.support()[i]) <= 1e-12);
        CHECK(std::abs(at0.weights()[i] - a.weights()[i]) <= 1e-12);
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(at1.support()[i] - g.support()[i]) <= 1e-12);
        CHECK(std::abs(at1.weights()[i] - g.weights()[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("mixture interpolation puts (1-k)/2 on the empty container") {
  const std::vector<double> amounts{0.6, 0.65, 0.7, 0.75, 0.8};
  const auto init = DiscreteDistribution::with_zero(amounts, 0.5);
  const auto goal = DiscreteDistribution::uniform(amounts);
  for (double k : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9}) {
    const auto mix = interpolate_discrete(init, goal, TemporalFactor(k));
    CHECK(mix.weight_of(0.0) == doctest::Approx((1.0 - k) * 0.5).epsilon(1e-14));
    double sum = 0.0;
    for (double w : mix.weights()) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (double a : amounts) CHECK(mix.weight_of(a) == doctest::Approx(0.1 + 0.1 * k).epsilon(1e-14));
  }
  CHECK(interpolate_discrete(init, goal, TemporalFactor(1.0)).weight_of(0.0) == 0.0);
}

TEST_CASE("position samples stay in the box and cover it") {
  Rng rng(1);
  const BoxDistribution box({0.1, -0.2}, {0.3, 0.4});
  double sx = 0.0, sy = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_position(box, rng);
    REQUIRE(p.size() == 2);
    CHECK((p[0] >= 0.1 && p[0] <= 0.3));
    CHECK((p[1] >= -0.2 && p[1] <= 0.4));
    sx += p[0];
    sy += p[1];
  }
  // Means within 5 standard errors of the box centre.
  CHECK(std::abs(sx / n - 0.2) < 5.0 * 0.2 / std::sqrt(12.0 * n));
  CHECK(std::abs(sy / n - 0.1) < 5.0 * 0.6 / std::sqrt(12.0 * n));
  const BoxDistribution point({0.25}, {0.25});
  CHECK(sample_position(point, rng)[0] == 0.25);
}

TEST_CASE("amount samples follow the weights (chi-square)") {
  Rng rng(2);
  const auto d = interpolate_discrete(DiscreteDistribution::with_zero({0.6, 0.65, 0.7, 0.75, 0.8}, 0.5),
                                      DiscreteDistribution::uniform({0.6, 0.65, 0.7, 0.75, 0.8}),
                                      TemporalFactor(0.3));
  std::vector<long> counts(d.size(), 0);
  for (int i = 0; i < 100000; ++i) {
    const double a = sample_amount(d, rng);
    const auto it = std::find(d.support().begin(), d.support().end(), a);
    REQUIRE(it != d.support().end());
    ++counts[static_cast<std::size_t>(it - d.support().begin())];
  }
  CHECK(oracle::chi_square(counts, d.weights()) < oracle::chi2_critical_999(static_cast<int>(d.size()) - 1));
}

TEST_CASE("factorized reward table") {
  const double eps = 0.03;
  const GoalState desired{{0.25, 0.30}, 0.7};
  for (int i = 0; i <= 10; ++i) {
    const double err = 0.1 * i;
    for (bool inside : {true, false}) {
      const double amt = desired.amount + err <= 1.0 ? desired.amount + err : desired.amount - err;
      if (amt < 0.0) continue;
      const GoalState achieved{{0.25 + (inside ? 0.02 : 0.05), 0.30}, amt};
      const double da = std::abs(achieved.amount - desired.amount);
      const double expected = (inside ? 1.0 : 0.0) * (1.0 - da) - 1.0;
      const double r = reward_factorized(achieved, desired, eps);
      CHECK(r == expected);
      CHECK((r >= -1.0 && r <= 0.0));
    }
  }
  // Boundary: exactly epsilon away counts as inside.
  CHECK(reward_factorized({{0.28, 0.30}, 0.7}, {{0.25, 0.30}, 0.7}, 0.0300000001) == 0.0);
  CHECK(reward_factorized({{0.0, 0.0}, 1.0}, {{0.0, 0.0}, 0.0}, eps) == -1.0);
}

TEST_CASE("sparse reward needs both goals") {
  const GoalState d{{0.25, 0.30}, 0.7};
  CHECK(reward_sparse({{0.25, 0.30}, 0.72}, d, 0.03, 0.05) == 0.0);
  CHECK(reward_sparse({{0.25, 0.30}, 0.80}, d, 0.03, 0.05) == -1.0);
  CHECK(reward_sparse({{0.30, 0.30}, 0.70}, d, 0.03, 0.05) == -1.0);
}

TEST_CASE("goal validation") {
  CHECK_THROWS_AS((GoalState{{0.1, 0.1}, 1.5}.validate()), Error);
  CHECK_THROWS_AS((GoalState{{NAN, 0.1}, 0.5}.validate()), Error);
  CHECK_NOTHROW((GoalState{{0.1, 0.1}, 0.0}.validate()));
  CHECK(position_distance(std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0}) == 5.0);
}
