#include "doctest.h"

#include <cmath>
#include <sstream>

#include "goats/error.hpp"
#include "goats/scoopenv.hpp"

using namespace goats;

namespace {

EnvConfig quiet_config() {
  EnvConfig c;
  c.waterline_obs_noise_sigma = 0.0;
  return c;
}

}  // namespace

TEST_CASE("reset places the container at the spawn pose over a sampled waterline") {
  const EnvConfig c;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto r = reset(c, rng);
    CHECK(r.state.x == c.spawn_position[0]);
    CHECK(r.state.y == c.spawn_position[1]);
    CHECK(r.state.fill_volume == 0.0);
    const double level = waterline(r.state, c);
    CHECK((level >= c.waterline_range[0] && level <= c.waterline_range[1]));
    CHECK(r.state.step_count == 0);
    CHECK(std::abs(r.obs[7] - level) < 6.0 * c.waterline_obs_noise_sigma);
  }
}

TEST_CASE("config validation rejects inconsistent geometry") {
  EnvConfig c;
  c.waterline_range = {0.1, 0.3};  // above the wall
  CHECK_THROWS_AS(c.validate(), Error);
  c = EnvConfig{};
  c.container_width = 0.6;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EnvConfig{};
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EnvConfig{};
  c.episode_len = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(EnvConfig::preset(ContainerPreset::Bucket).validate());
  CHECK(container_preset_from_string("bucket") == ContainerPreset::Bucket);
  CHECK_THROWS_AS(container_preset_from_string("mug"), Error);
}

TEST_CASE("kinematics: semi-implicit Euler with clamps") {
  const EnvConfig c = quiet_config();
  Rng rng(0);
  EnvState s;
  s.x = 0.25;
  s.y = 0.30;
  s.tank_volume = 0.1 * c.tank_width;
  const auto r = step(s, {1.0, -0.5, 2.0}, c, rng);  // alpha clamps to 1
  const double vx = c.a_max * c.dt, vy = -0.5 * c.a_max * c.dt, om = c.alpha_max * c.dt;
  CHECK(r.state.vx == doctest::Approx(vx));
  CHECK(r.state.vy == doctest::Approx(vy));
  CHECK(r.state.omega == doctest::Approx(om));
  CHECK(r.state.x == doctest::Approx(0.25 + vx * c.dt));
  CHECK(r.state.y == doctest::Approx(0.30 + vy * c.dt));
  CHECK(r.state.theta == doctest::Approx(om * c.dt));
  CHECK(r.state.step_count == 1);

  // Velocity saturation and wall contact.
  EnvState fast = s;
  fast.vx = c.v_max;
  fast.x = c.workspace.upper()[0] - 1e-4;
  const auto w = step(fast, {1.0, 0.0, 0.0}, c, rng);
  CHECK(w.state.x == c.workspace.upper()[0]);
  CHECK(w.state.vx == 0.0);

  EnvState tilted = s;
  tilted.theta = c.theta_max - 1e-3;
  tilted.omega = c.omega_max;
  const auto t = step(tilted, {0.0, 0.0, 1.0}, c, rng);
  CHECK(t.state.theta == c.theta_max);
  CHECK(t.state.omega == 0.0);
}

TEST_CASE("fill rule, hand-stepped") {
  const EnvConfig c = quiet_config();
  Rng rng(0);
  EnvState s;
  s.x = 0.25;
  s.y = 0.05;  // rim below a 0.12 waterline
  s.tank_volume = 0.12 * c.tank_width;
  const double total = s.tank_volume;

  double fill = 0.0, tank = total;
  for (int i = 0; i < 40; ++i) {
    const auto r = step(s, {0.0, 0.0, 0.0}, c, rng);
    const double level = tank / c.tank_width;
    double inflow = c.c_in * (level - 0.05) * c.dt * c.container_width;
    inflow = std::min({inflow, c.container_capacity - fill, tank});
    fill += inflow;
    tank -= inflow;
    CHECK(r.state.fill_volume == doctest::Approx(fill).epsilon(1e-12));
    CHECK(r.state.tank_volume == doctest::Approx(tank).epsilon(1e-12));
    s = r.state;
  }
  CHECK(fill_fraction(s, c) == doctest::Approx(fill / c.container_capacity));
  CHECK(fill <= c.container_capacity);

  // Above the waterline nothing flows in.
  EnvState dry = s;
  dry.y = 0.30;
  const auto d = step(dry, {0.0, 0.0, 0.0}, c, rng);
  CHECK(d.state.fill_volume == dry.fill_volume);
}

TEST_CASE("tilting spills the excess over the reduced capacity") {
  const EnvConfig c = quiet_config();
  Rng rng(0);
  EnvState s;
  s.x = 0.25;
  s.y = 0.35;
  s.fill_volume = c.container_capacity;
  s.tank_volume = 0.08 * c.tank_width;
  s.theta = 0.6;  // half of theta_spill
  const auto r = step(s, {0.0, 0.0, 0.0}, c, rng);
  const double effective = c.container_capacity * (1.0 - 0.6 / c.theta_spill);
  const double excess = c.container_capacity - effective;
  CHECK(r.state.fill_volume == doctest::Approx(c.container_capacity - c.c_out * excess * c.dt));
  CHECK(r.state.fill_volume + r.state.tank_volume ==
        doctest::Approx(s.fill_volume + s.tank_volume).epsilon(1e-14));

  // Past theta_spill the container empties in one step.
  s.theta = c.theta_spill + 0.05;
  const auto e = step(s, {0.0, 0.0, 0.0}, c, rng);
  CHECK(e.state.fill_volume == 0.0);
}

TEST_CASE("random-action episodes conserve water") {
  const EnvConfig c;
  Rng rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int ep = 0; ep < 300; ++ep) {
    auto r = reset(c, rng);
    const double total = r.state.fill_volume + r.state.tank_volume;
    EnvState s = r.state;
    for (int t = 0; t < c.episode_len; ++t) {
      const auto res = step(s, {u(rng), u(rng), u(rng)}, c, rng);
      s = res.state;
      CHECK(std::abs(s.fill_volume + s.tank_volume - total) <= 1e-9 * total);
      CHECK((s.fill_volume >= 0.0 && s.fill_volume <= c.container_capacity));
      CHECK(res.done == (t + 1 == c.episode_len));
    }
  }
}

TEST_CASE("achieved goal and observation layout") {
  const EnvConfig c = quiet_config();
  Rng rng(0);
  EnvState s;
  s.x = 0.2;
  s.y = 0.3;
  s.theta = 0.1;
  s.vx = 0.01;
  s.vy = -0.02;
  s.omega = 0.3;
  s.fill_volume = 0.25 * c.container_capacity;
  s.tank_volume = 0.1 * c.tank_width;
  const auto g = achieved_goal(s, c);
  CHECK(g.position == std::vector<double>{0.2, 0.3});
  CHECK(g.amount == doctest::Approx(0.25));
  const auto o = observe(s, c, rng);
  CHECK(o[0] == 0.2);
  CHECK(o[5] == 0.3);
  CHECK(o[6] == doctest::Approx(0.25));
  CHECK(o[7] == doctest::Approx(0.1));
  CHECK(rim_height(s, c) == doctest::Approx(0.3 - 0.5 * c.container_width * std::sin(0.1)));
}

TEST_CASE("NaN inputs abort the step") {
  const EnvConfig c;
  Rng rng(0);
  auto r = reset(c, rng);
  CHECK_THROWS_AS(step(r.state, {NAN, 0.0, 0.0}, c, rng), Error);
  EnvState bad = r.state;
  bad.vx = INFINITY;
  CHECK_THROWS_AS(step(bad, {0.0, 0.0, 0.0}, c, rng), Error);
}

TEST_CASE("stepping is deterministic given the seed") {
  const EnvConfig c;
  auto rollout = [&](std::uint64_t seed) {
    Rng rng(seed);
    auto r = reset(c, rng);
    std::vector<double> trace;
    EnvState s = r.state;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < c.episode_len; ++t) {
      const auto res = step(s, {u(rng), u(rng), u(rng)}, c, rng);
      s = res.state;
      trace.insert(trace.end(), res.obs.begin(), res.obs.end());
    }
    return trace;
  };
  CHECK(rollout(9) == rollout(9));
  CHECK(rollout(9) != rollout(10));
}

TEST_CASE("trace writer emits a header and one row per call") {
  const EnvConfig c;
  std::ostringstream os;
  TraceWriter w(os);
  EnvState s;
  s.tank_volume = 0.1 * c.tank_width;
  w.write(0, s, c, -1.0);
  w.write(1, s, c, -0.5);
  const std::string text = os.str();
  CHECK(text.rfind("step,x,y,theta,fill_fraction,waterline,reward\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
