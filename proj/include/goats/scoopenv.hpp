#pragma once

// Planar water-scooping surrogate. A container is driven by accelerations in
// a vertical (x, y) plane plus a tilt angle. Water lives in a flat heightfield
// tank; an analytic inflow rule fills the container while its rim is under
// the waterline and a spill rule returns water when the container tilts.
// Water only moves between tank and container, so total volume is conserved.

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "goats/goaldist.hpp"

namespace goats {

enum class ContainerPreset { Bowl, Bucket };

const char* to_string(ContainerPreset preset);
ContainerPreset container_preset_from_string(const std::string& name);

struct EnvConfig {
  ContainerPreset container_preset = ContainerPreset::Bowl;
  double tank_width = 0.5;         // m
  double tank_wall_height = 0.20;  // m
  BoxDistribution workspace{{0.05, 0.02}, {0.45, 0.45}};
  std::array<double, 2> spawn_position{0.25, 0.24};
  double container_width = 0.154;      // m, rim to rim
  double container_capacity = 0.5 * 3.14159265358979323846 * 0.077 * 0.077;  // m^2
  double dt = 0.05;                    // s
  double a_max = 1.0;                  // m/s^2
  double alpha_max = 4.0;              // rad/s^2
  double v_max = 0.4;                  // m/s
  double omega_max = 2.0;              // rad/s
  double theta_max = 1.5707963267948966;
  double theta_spill = 1.2;  // rad
  double c_in = 2.0;         // 1/s
  double c_out = 2.0;        // 1/s
  int episode_len = 75;
  std::array<double, 2> waterline_range{0.08, 0.16};
  double waterline_obs_noise_sigma = 0.002;

  /// Geometry and goal defaults for a preset.
  static EnvConfig preset(ContainerPreset preset);
  /// Throws Error(Config) if any invariant fails.
  void validate() const;
};

struct EnvState {
  double x = 0.0, y = 0.0, theta = 0.0;
  double vx = 0.0, vy = 0.0, omega = 0.0;
  double fill_volume = 0.0;
  double tank_volume = 0.0;
  int step_count = 0;
};

inline constexpr std::size_t kObsDim = 8;
inline constexpr std::size_t kActionDim = 3;
inline constexpr std::size_t kGoalDim = 3;  // 2-D position + amount

/// x, y, theta, vx, vy, omega, fill fraction, observed waterline.
using Observation = std::array<double, kObsDim>;
/// Normalized (ax, ay, alpha) in [-1, 1]; clamped again on application.
using EnvAction = std::array<double, kActionDim>;

struct StepResult {
  EnvState state;
  Observation obs;
  GoalState achieved;
  bool done = false;
};

struct ResetResult {
  EnvState state;
  Observation obs;
};

ResetResult reset(const EnvConfig& config, Rng& rng);

/// Advances one control step. The rng is only consumed when the waterline
/// observation noise is positive.
StepResult step(const EnvState& state, const EnvAction& action, const EnvConfig& config,
                Rng& rng);

GoalState achieved_goal(const EnvState& state, const EnvConfig& config);
double waterline(const EnvState& state, const EnvConfig& config);
double fill_fraction(const EnvState& state, const EnvConfig& config);
Observation observe(const EnvState& state, const EnvConfig& config, Rng& rng);

/// Lowest point of the container rim for the current tilt.
double rim_height(const EnvState& state, const EnvConfig& config);

/// Per-step CSV trace for offline plotting.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void write(int step, const EnvState& state, const EnvConfig& config, double reward);

 private:
  std::ostream& out_;
};

}  // namespace goats
