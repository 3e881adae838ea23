#include "goats/scoopenv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "goats/error.hpp"

namespace goats {

const char* to_string(ContainerPreset preset) {
  return preset == ContainerPreset::Bowl ? "bowl" : "bucket";
}

ContainerPreset container_preset_from_string(const std::string& name) {
  if (name == "bowl") return ContainerPreset::Bowl;
  if (name == "bucket") return ContainerPreset::Bucket;
  fail(ErrorCode::Config, "unknown container preset '" + name + "' (expected bowl or bucket)");
}

EnvConfig EnvConfig::preset(ContainerPreset preset) {
  EnvConfig c;
  c.container_preset = preset;
  if (preset == ContainerPreset::Bowl) {
    // Half-disc cross-section of a 7.7 cm radius bowl.
    c.container_width = 2.0 * 0.077;
    c.container_capacity = 0.5 * 3.14159265358979323846 * 0.077 * 0.077;
    c.workspace = BoxDistribution({0.05, 0.02}, {0.45, 0.45});
  } else {
    // 11.7 cm front length, 12 cm deep rectangular profile.
    c.container_width = 0.117;
    c.container_capacity = 0.117 * 0.12;
    c.workspace = BoxDistribution({0.05, 0.02}, {0.45, 0.55});
  }
  return c;
}

void EnvConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::Config, std::string("env.") + name + " must be positive");
    }
  };
  positive(tank_width, "tank_width");
  positive(tank_wall_height, "tank_wall_height");
  positive(container_width, "container_width");
  positive(container_capacity, "container_capacity");
  positive(dt, "dt");
  positive(a_max, "a_max");
  positive(alpha_max, "alpha_max");
  positive(v_max, "v_max");
  positive(omega_max, "omega_max");
  positive(theta_max, "theta_max");
  positive(theta_spill, "theta_spill");
  positive(c_in, "c_in");
  positive(c_out, "c_out");
  if (container_width >= tank_width) fail(ErrorCode::Config, "env.container_width must be below tank_width");
  if (episode_len < 1) fail(ErrorCode::Config, "env.episode_len must be at least 1");
  if (workspace.dim() != 2) fail(ErrorCode::Config, "env.workspace must be two-dimensional");
  const auto [h_min, h_max] = waterline_range;
  if (!(h_min > 0.0) || h_min > h_max) {
    fail(ErrorCode::Config, "env.waterline_range must satisfy 0 < h_min <= h_max");
  }
  if (h_max > tank_wall_height) {
    fail(ErrorCode::Config, "env.waterline_range upper bound exceeds the tank wall height");
  }
  if (!(waterline_obs_noise_sigma >= 0.0)) {
    fail(ErrorCode::Config, "env.waterline_obs_noise_sigma must be nonnegative");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (spawn_position[i] < workspace.lower()[i] || spawn_position[i] > workspace.upper()[i]) {
      fail(ErrorCode::Config, "env.spawn_position lies outside the workspace");
    }
  }
}

double waterline(const EnvState& state, const EnvConfig& config) {
  return state.tank_volume / config.tank_width;
}

double fill_fraction(const EnvState& state, const EnvConfig& config) {
  return std::clamp(state.fill_volume / config.container_capacity, 0.0, 1.0);
}

double rim_height(const EnvState& state, const EnvConfig& config) {
  return state.y - 0.5 * config.container_width * std::abs(std::sin(state.theta));
}

GoalState achieved_goal(const EnvState& state, const EnvConfig& config) {
  return GoalState{{state.x, state.y}, fill_fraction(state, config)};
}

Observation observe(const EnvState& state, const EnvConfig& config, Rng& rng) {
  double level = waterline(state, config);
  if (config.waterline_obs_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config.waterline_obs_noise_sigma);
    level += noise(rng);
  }
  return {state.x,  state.y,     state.theta,
          state.vx, state.vy,    state.omega,
          fill_fraction(state, config), level};
}

ResetResult reset(const EnvConfig& config, Rng& rng) {
  config.validate();
  const auto [h_min, h_max] = config.waterline_range;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double level = h_min + (h_max - h_min) * unit(rng);

  EnvState s;
  s.x = config.spawn_position[0];
  s.y = config.spawn_position[1];
  s.tank_volume = level * config.tank_width;
  Observation obs = observe(s, config, rng);
  return {s, obs};
}

StepResult step(const EnvState& state, const EnvAction& action, const EnvConfig& config,
                Rng& rng) {
  const double fields[] = {state.x,  state.y,     state.theta,       state.vx,
                           state.vy, state.omega, state.fill_volume, state.tank_volume};
  for (double v : fields) {
    if (!std::isfinite(v)) fail(ErrorCode::Numerical, "environment state contains NaN/Inf");
  }
  for (double a : action) {
    if (!std::isfinite(a)) fail(ErrorCode::Numerical, "action contains NaN/Inf");
  }

  EnvState s = state;
  const double dt = config.dt;
  const double ax = std::clamp(action[0], -1.0, 1.0) * config.a_max;
  const double ay = std::clamp(action[1], -1.0, 1.0) * config.a_max;
  const double alpha = std::clamp(action[2], -1.0, 1.0) * config.alpha_max;

  // Semi-implicit Euler: velocities first, then poses from the new velocities.
  s.vx = std::clamp(s.vx + ax * dt, -config.v_max, config.v_max);
  s.vy = std::clamp(s.vy + ay * dt, -config.v_max, config.v_max);
  s.omega = std::clamp(s.omega + alpha * dt, -config.omega_max, config.omega_max);
  s.x += s.vx * dt;
  s.y += s.vy * dt;
  s.theta += s.omega * dt;

  auto clamp_axis = [](double& p, double& v, double lo, double hi) {
    if (p < lo) {
      p = lo;
      v = 0.0;
    } else if (p > hi) {
      p = hi;
      v = 0.0;
    }
  };
  clamp_axis(s.x, s.vx, config.workspace.lower()[0], config.workspace.upper()[0]);
  clamp_axis(s.y, s.vy, config.workspace.lower()[1], config.workspace.upper()[1]);
  clamp_axis(s.theta, s.omega, -config.theta_max, config.theta_max);

  const double capacity = config.container_capacity;
  const double tilt = std::abs(s.theta);

  // Inflow while the rim is submerged and the container is upright enough.
  const double level = waterline(s, config);
  const double rim = rim_height(s, config);
  if (tilt < config.theta_spill && rim < level) {
    double delta = config.c_in * (level - rim) * dt * config.container_width;
    delta = std::min({delta, capacity - s.fill_volume, s.tank_volume});
    if (delta > 0.0) {
      s.fill_volume += delta;
      s.tank_volume -= delta;
    }
  }

  // Spill the excess over the tilt-reduced capacity back into the tank.
  const double effective = capacity * std::clamp(1.0 - tilt / config.theta_spill, 0.0, 1.0);
  if (s.fill_volume > effective) {
    const double excess = s.fill_volume - effective;
    double back = config.c_out * excess * dt;
    if (tilt >= config.theta_spill) back += excess;
    back = std::min(back, s.fill_volume);
    s.fill_volume -= back;
    s.tank_volume += back;
  }

  s.step_count = state.step_count + 1;
  StepResult out;
  out.state = s;
  out.obs = observe(s, config, rng);
  out.achieved = achieved_goal(s, config);
  out.done = s.step_count == config.episode_len;
  return out;
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
  out_ << "step,x,y,theta,fill_fraction,waterline,reward\n";
}

void TraceWriter::write(int step_index, const EnvState& state, const EnvConfig& config,
                        double reward) {
  std::ostringstream os;
  os.precision(10);
  os << step_index << ',' << state.x << ',' << state.y << ',' << state.theta << ','
     << fill_fraction(state, config) << ',' << waterline(state, config) << ',' << reward << '\n';
  out_ << os.str();
}

}  // namespace goats
