#pragma once

// Episode-structured replay with hindsight relabeling ("future" strategy).
// Rewards are never stored; every sampled transition has its reward
// recomputed against the goal it is returned with.

#include <deque>
#include <functional>
#include <vector>

#include "goats/goaldist.hpp"
#include "goats/scoopenv.hpp"
#include "goats/tinynn.hpp"

namespace goats {

struct Transition {
  Observation obs{};
  EnvAction action{};
  Observation next_obs{};
  GoalState achieved;       // projection of obs
  GoalState achieved_next;  // projection of next_obs
  GoalState desired;
  bool done = false;
};

using Episode = std::vector<Transition>;

using RewardFn = std::function<double(const GoalState& achieved, const GoalState& desired, double epsilon)>;

/// Network input for a (observation, goal) pair: obs || goal position ||
/// goal amount, optionally followed by the achieved goal.
std::vector<double> policy_input(const Observation& obs, const GoalState& desired,
                                 const GoalState* achieved = nullptr);
int policy_input_dim(std::size_t position_dim, bool append_achieved);

struct Batch {
  Matrix inputs;       // D x B
  Matrix actions;      // 3 x B
  Vector rewards;      // B
  Matrix next_inputs;  // D x B
  Vector dones;        // B, 1.0 for terminal transitions

  // Bookkeeping for diagnostics and tests.
  std::vector<std::size_t> episode_ids;  // monotone id of the source episode
  std::vector<int> step_indices;
  std::vector<int> goal_indices;  // step whose achieved_next became the goal
  std::vector<bool> relabeled;
  std::vector<GoalState> achieved_next;
  std::vector<GoalState> goals;
};

struct HerConfig {
  std::size_t capacity = 1'000'000;
  int k_her = 4;
  bool append_achieved = false;
};

class HerBuffer {
 public:
  HerBuffer(HerConfig config, int episode_len);

  /// Appends a complete episode, evicting the oldest ones past capacity.
  void store_episode(Episode episode);

  /// Uniform draw over stored transitions; each one is relabeled with
  /// probability k_her / (k_her + 1) to a goal achieved at or after its step.
  Batch sample_batch(std::size_t batch_size, Rng& rng, const RewardFn& reward_fn,
                     double epsilon) const;

  std::size_t size() const { return total_; }
  std::size_t num_episodes() const { return episodes_.size(); }
  double relabel_probability() const;
  const HerConfig& config() const { return config_; }

  /// Id of the oldest episode still stored (ids increase by one per store).
  std::size_t first_episode_id() const { return first_id_; }
  const Episode& episode(std::size_t i) const { return episodes_[i]; }

 private:
  HerConfig config_;
  int episode_len_;
  std::deque<Episode> episodes_;
  std::size_t total_ = 0;
  std::size_t first_id_ = 0;
};

}  // namespace goats
