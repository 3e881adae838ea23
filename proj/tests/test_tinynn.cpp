#include "doctest.h"

#include <cmath>

#include "goats/error.hpp"
#include "goats/tinynn.hpp"
#include "oracles.hpp"

using namespace goats;

TEST_CASE("hand-set network forward pass") {
  Mlp net({2, 2, 1});
  CHECK(net.num_params() == 2 * 2 + 2 + 2 * 1 + 1);
  net.weight(0) << 1.0, -1.0, 0.5, 2.0;
  net.bias(0) << 0.0, -1.0;
  net.weight(1) << 3.0, -2.0;
  net.bias(1) << 0.25;
  Matrix x(2, 2);
  x << 1.0, -1.0,
       0.5, 2.0;
  const Matrix y = net.forward(x);
  // column 0: h = relu([0.5, 0.5 + 1 - 1]) = [0.5, 0.5]; y = 1.5 - 1 + 0.25
  CHECK(y(0, 0) == doctest::Approx(0.75));
  // column 1: h = relu([-3, -0.5 + 4 - 1]) = [0, 2.5]; y = -5 + 0.25
  CHECK(y(0, 1) == doctest::Approx(-4.75));
  // Parameters are stored W0 row-major, b0, W1, b1.
  CHECK(net.params()[1] == -1.0);
  CHECK(net.params()[4] == 0.0);
  CHECK(net.params()[5] == -1.0);
  CHECK_THROWS_AS(net.forward(Matrix(Matrix::Zero(3, 1))), Error);
}

TEST_CASE("initialization respects fan-in bounds and the final-layer scale") {
  Rng rng(1);
  const Mlp net = Mlp::initialized({10, 32, 4}, rng, 1e-3);
  const double b0 = 1.0 / std::sqrt(10.0), b1 = 1e-3 / std::sqrt(32.0);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() <= b0);
  CHECK(net.weight(1).cwiseAbs().maxCoeff() <= b1);
  CHECK(net.bias(1).isZero());
  Rng again(1);
  CHECK(Mlp::initialized({10, 32, 4}, again, 1e-3) == net);
}

TEST_CASE("backward matches central differences, parameters and inputs") {
  Rng rng(2);
  const Mlp net = Mlp::initialized({5, 7, 6, 3}, rng, 1.0);
  const Matrix x = standard_normal(5, 4, rng);
  const Matrix target = standard_normal(3, 4, rng);

  auto loss_at = [&](const Mlp& n, const Matrix& in) { return 0.5 * (n.forward(in) - target).squaredNorm(); };
  const Matrix grad_out = net.forward(x) - target;
  const MlpGradients g = backward(net, x, grad_out);

  LossFn loss = [&](std::span<const double> p, std::span<double> grad) {
    Mlp n = net;
    std::copy(p.begin(), p.end(), n.params().begin());
    if (!grad.empty()) {
      const auto gg = backward(n, x, n.forward(x) - target);
      std::copy(gg.params.begin(), gg.params.end(), grad.begin());
    }
    return loss_at(n, x);
  };
  const auto rep = finite_diff_check(loss, net.params(), layer_blocks(net, "net"), 1e-5, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.blocks.size() == 6);
  CHECK(rep.blocks[0].name == "net.W0");
  CHECK(rep.blocks[1].name == "net.b0");

  const double h = 1e-6;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Matrix xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      const double num = (loss_at(net, xp) - loss_at(net, xm)) / (2.0 * h);
      CHECK(g.input(r, c) == doctest::Approx(num).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient checker flags a wrong gradient") {
  std::vector<double> p{0.3, -1.2, 2.0};
  LossFn good = [](std::span<const double> q, std::span<double> grad) {
    if (!grad.empty()) {
      for (std::size_t i = 0; i < q.size(); ++i) grad[i] = 2.0 * q[i];
    }
    return q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
  };
  LossFn bad = [&](std::span<const double> q, std::span<double> grad) {
    const double l = good(q, grad);
    if (!grad.empty()) grad[1] *= 1.01;
    return l;
  };
  const std::vector<ParamBlock> blocks{{"p", 0, 3}};
  CHECK(finite_diff_check(good, p, blocks, 1e-5, 1e-6).passed);
  const auto rep = finite_diff_check(bad, p, blocks, 1e-5, 1e-4);
  CHECK_FALSE(rep.passed);
  CHECK(rep.blocks[0].worst_index == 1);
  CHECK(rep.max_rel_error == doctest::Approx(0.01 / 1.01).epsilon(1e-4));
}

TEST_CASE("squashed Gaussian log-probability matches the change-of-variables density") {
  Rng rng(3);
  GaussianPolicyHead head(6, 3, {16, 16}, rng, 1.0);
  const Matrix obs = standard_normal(6, 50, rng);
  const PolicySample s = head.sample(obs, rng, false);
  for (Eigen::Index b = 0; b < obs.cols(); ++b) {
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
      expected += oracle::squashed_log_density(s.action(i, b), s.mean(i, b), std::exp(s.log_std(i, b)));
    }
    CHECK(s.log_prob(b) == doctest::Approx(expected).epsilon(1e-8));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.action(i, b)) < 1.0);
  }
}

TEST_CASE("the squashed density integrates to one") {
  // Quadrature of exp(log p(a)) over a in (-1, 1) via the substitution a = tanh(u).
  for (auto [mu, sigma] : {std::pair{0.0, 1.0}, std::pair{0.8, 0.3}, std::pair{-1.5, 2.0}}) {
    double total = 0.0;
    const double lo = mu - 12.0 * sigma, hi = mu + 12.0 * sigma;
    const int n = 20000;
    const double du = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      const double u = lo + (i + 0.5) * du;
      const double a = std::tanh(u);
      if (std::abs(a) >= 1.0) continue;
      total += std::exp(oracle::squashed_log_density(a, mu, sigma)) * (1.0 - a * a) * du;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("deterministic sampling returns tanh of the mean") {
  Rng rng(4);
  GaussianPolicyHead head(4, 2, {8}, rng, 1.0);
  const Matrix obs = standard_normal(4, 5, rng);
  const PolicySample s = head.sample(obs, rng, true);
  CHECK(s.action.isApprox(s.mean.array().tanh().matrix()));
  CHECK(s.noise.isZero());
  Rng r1(9), r2(9);
  const auto a = sample_squashed_gaussian(head, std::vector<double>(4, 0.1), r1, false);
  const auto b = sample_squashed_gaussian(head, std::vector<double>(4, 0.1), r2, false);
  CHECK(a.action == b.action);
  CHECK(a.log_prob == b.log_prob);
}

TEST_CASE("log-std is clamped") {
  Rng rng(5);
  GaussianPolicyHead head(3, 1, {4}, rng, 1.0);
  Mlp& net = head.net();
  net.bias(1)(1) = 50.0;
  const Matrix obs = Matrix::Zero(3, 1);
  CHECK(head.sample(obs, rng, false).log_std(0, 0) == kLogStdMax);
  net.bias(1)(1) = -50.0;
  CHECK(head.sample(obs, rng, false).log_std(0, 0) == kLogStdMin);
}

TEST_CASE("policy head backward matches central differences") {
  Rng rng(6);
  GaussianPolicyHead head(5, 3, {12, 12}, rng, 1.0);
  const Matrix obs = standard_normal(5, 8, rng);
  const Matrix noise = standard_normal(3, 8, rng);
  const Matrix ga = standard_normal(3, 8, rng);
  const Vector gl = Vector::Random(8);

  LossFn loss = [&](std::span<const double> p, std::span<double> grad) {
    GaussianPolicyHead h = head;
    std::copy(p.begin(), p.end(), h.net().params().begin());
    const PolicySample s = h.sample(obs, noise, false);
    if (!grad.empty()) h.backward(s, ga, gl, grad);
    return (ga.array() * s.action.array()).sum() + gl.dot(s.log_prob);
  };
  const auto rep = finite_diff_check(loss, head.net().params(), layer_blocks(head.net(), "pi"), 1e-5, 1e-5);
  CHECK(rep.passed);
}

TEST_CASE("Adam first step moves each parameter by lr against the gradient sign") {
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, -4.0, 1e-3};
  AdamState st = AdamState::zeros(3, 0.01);
  adam_step(p, g, st);
  CHECK(st.t == 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected_step = 0.01 * g[i] / (std::abs(g[i]) + st.eps);
    CHECK(p[i] == doctest::Approx(std::vector<double>{1.0, -2.0, 0.5}[i] - expected_step).epsilon(1e-12));
  }
  // Second step with the same gradient: bias-corrected moments equal g and g^2 again.
  adam_step(p, g, st);
  CHECK(p[0] == doctest::Approx(1.0 - 2.0 * 0.01 * 0.3 / (0.3 + st.eps)).epsilon(1e-12));
  CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, st), Error);
}
