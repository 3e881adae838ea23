#include "goats/replay.hpp"

#include <sstream>

#include "goats/error.hpp"

namespace goats {

std::vector<double> policy_input(const Observation& obs, const GoalState& desired,
                                 const GoalState* achieved) {
  std::vector<double> in(obs.begin(), obs.end());
  in.insert(in.end(), desired.position.begin(), desired.position.end());
  in.push_back(desired.amount);
  if (achieved != nullptr) {
    in.insert(in.end(), achieved->position.begin(), achieved->position.end());
    in.push_back(achieved->amount);
  }
  return in;
}

int policy_input_dim(std::size_t position_dim, bool append_achieved) {
  const auto goal = static_cast<int>(position_dim) + 1;
  return static_cast<int>(kObsDim) + goal + (append_achieved ? goal : 0);
}

HerBuffer::HerBuffer(HerConfig config, int episode_len) : config_(config), episode_len_(episode_len) {
  if (episode_len_ < 1) fail(ErrorCode::InvalidArgument, "episode length must be positive");
  if (config_.k_her < 0) fail(ErrorCode::InvalidArgument, "k_her must be nonnegative");
  if (config_.capacity < static_cast<std::size_t>(episode_len_)) {
    fail(ErrorCode::InvalidArgument, "replay capacity is smaller than one episode");
  }
}

double HerBuffer::relabel_probability() const {
  return static_cast<double>(config_.k_her) / static_cast<double>(config_.k_her + 1);
}

void HerBuffer::store_episode(Episode episode) {
  if (episode.size() != static_cast<std::size_t>(episode_len_)) {
    std::ostringstream os;
    os << "episode has " << episode.size() << " transitions, expected " << episode_len_;
    fail(ErrorCode::IncompleteEpisode, os.str());
  }
  while (total_ + episode.size() > config_.capacity) {
    total_ -= episodes_.front().size();
    episodes_.pop_front();
    ++first_id_;
  }
  total_ += episode.size();
  episodes_.push_back(std::move(episode));
}

Batch HerBuffer::sample_batch(std::size_t batch_size, Rng& rng, const RewardFn& reward_fn,
                              double epsilon) const {
  if (episodes_.empty()) fail(ErrorCode::EmptyBuffer, "cannot sample from an empty replay buffer");
  const bool with_achieved = config_.append_achieved;
  const std::size_t pos_dim = episodes_.front().front().desired.position.size();
  const int dim = policy_input_dim(pos_dim, with_achieved);
  const auto n = static_cast<Eigen::Index>(batch_size);

  Batch b;
  b.inputs.resize(dim, n);
  b.next_inputs.resize(dim, n);
  b.actions.resize(static_cast<Eigen::Index>(kActionDim), n);
  b.rewards.resize(n);
  b.dones.resize(n);
  b.episode_ids.resize(batch_size);
  b.step_indices.resize(batch_size);
  b.goal_indices.resize(batch_size);
  b.relabeled.resize(batch_size);
  b.achieved_next.resize(batch_size);
  b.goals.resize(batch_size);

  std::uniform_int_distribution<std::size_t> pick_episode(0, episodes_.size() - 1);
  std::uniform_int_distribution<int> pick_step(0, episode_len_ - 1);
  std::bernoulli_distribution relabel(relabel_probability());

  auto write_column = [](Matrix& m, Eigen::Index col, const std::vector<double>& v) {
    for (std::size_t r = 0; r < v.size(); ++r) m(static_cast<Eigen::Index>(r), col) = v[r];
  };

  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t e = pick_episode(rng);
    const int t = pick_step(rng);
    const Episode& ep = episodes_[e];
    const Transition& tr = ep[static_cast<std::size_t>(t)];

    GoalState goal = tr.desired;
    int goal_index = -1;
    const bool hindsight = config_.k_her > 0 && relabel(rng);
    if (hindsight) {
      std::uniform_int_distribution<int> future(t, episode_len_ - 1);
      goal_index = future(rng);
      goal = ep[static_cast<std::size_t>(goal_index)].achieved_next;
    }

    const auto col = static_cast<Eigen::Index>(i);
    write_column(b.inputs, col, policy_input(tr.obs, goal, with_achieved ? &tr.achieved : nullptr));
    write_column(b.next_inputs, col,
                 policy_input(tr.next_obs, goal, with_achieved ? &tr.achieved_next : nullptr));
    for (std::size_t a = 0; a < kActionDim; ++a) b.actions(static_cast<Eigen::Index>(a), col) = tr.action[a];
    b.rewards(col) = reward_fn(tr.achieved_next, goal, epsilon);
    b.dones(col) = tr.done ? 1.0 : 0.0;

    b.episode_ids[i] = first_id_ + e;
    b.step_indices[i] = t;
    b.goal_indices[i] = goal_index;
    b.relabeled[i] = hindsight;
    b.achieved_next[i] = tr.achieved_next;
    b.goals[i] = std::move(goal);
  }
  return b;
}

}  // namespace goats
