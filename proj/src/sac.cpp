#include "goats/sac.hpp"

#include <cmath>

#include "goats/error.hpp"

namespace goats {

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Matrix input_gradient(const Mlp& net, const MlpCache& cache, const Matrix& grad_out) {
  ParamVector scratch(net.num_params(), 0.0);
  return net.backward(cache, grad_out, scratch);
}

}  // namespace

void SacConfig::validate() const {
  if (hidden.empty()) fail(ErrorCode::Config, "sac.hidden needs at least one layer");
  for (int h : hidden) {
    if (h < 1) fail(ErrorCode::Config, "sac.hidden sizes must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) fail(ErrorCode::Config, "sac.gamma must lie in (0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorCode::Config, "sac.tau must lie in (0,1]");
  if (!(actor_lr > 0.0 && critic_lr > 0.0 && alpha_lr > 0.0)) {
    fail(ErrorCode::Config, "sac learning rates must be positive");
  }
  if (!(final_layer_scale > 0.0)) fail(ErrorCode::Config, "sac.final_layer_scale must be positive");
}

InputNormalizer InputNormalizer::identity(int dim) {
  return {std::vector<double>(static_cast<std::size_t>(dim), 0.0),
          std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
}

void InputNormalizer::apply(Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != offset.size()) {
    fail(ErrorCode::DimensionMismatch, "normalizer and input dimensions differ");
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r);
    x.row(r) = (x.row(r).array() - offset[i]) * scale[i];
  }
}

SacAgent::SacAgent(int input_dim, int action_dim, SacConfig config, Rng& rng)
    : config_(std::move(config)), input_dim_(input_dim), action_dim_(action_dim) {
  config_.validate();
  actor = GaussianPolicyHead(input_dim, action_dim, config_.hidden, rng, config_.final_layer_scale);
  const auto critic_sizes = layer_sizes(input_dim + action_dim, config_.hidden, 1);
  q1 = Mlp::initialized(critic_sizes, rng, config_.final_layer_scale);
  q2 = Mlp::initialized(critic_sizes, rng, config_.final_layer_scale);
  q1_target = q1;
  q2_target = q2;
  log_alpha = config_.init_log_alpha;
  actor_opt = AdamState::zeros(actor.net().num_params(), config_.actor_lr);
  q1_opt = AdamState::zeros(q1.num_params(), config_.critic_lr);
  q2_opt = AdamState::zeros(q2.num_params(), config_.critic_lr);
  alpha_opt = AdamState::zeros(1, config_.alpha_lr);
  normalizer = InputNormalizer::identity(input_dim);
}

double SacAgent::alpha() const { return std::exp(log_alpha); }

Matrix SacAgent::normalized(const Matrix& raw_inputs) const {
  Matrix x = raw_inputs;
  normalizer.apply(x);
  return x;
}

Matrix SacAgent::stack_state_action(const Matrix& inputs, const Matrix& actions) {
  Matrix sa(inputs.rows() + actions.rows(), inputs.cols());
  sa.topRows(inputs.rows()) = inputs;
  sa.bottomRows(actions.rows()) = actions;
  return sa;
}

EnvAction SacAgent::act(std::span<const double> input, Rng& rng, bool deterministic) const {
  if (static_cast<int>(input.size()) != input_dim_) {
    fail(ErrorCode::DimensionMismatch, "policy input has the wrong dimension");
  }
  Matrix x(input_dim_, 1);
  for (int i = 0; i < input_dim_; ++i) x(i, 0) = input[static_cast<std::size_t>(i)];
  normalizer.apply(x);
  const PolicySample s = actor.sample(x, rng, deterministic);
  EnvAction a{};
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = s.action(static_cast<Eigen::Index>(i), 0);
  return a;
}

Vector SacAgent::critic_targets(const Matrix& next_inputs, const Vector& rewards, const Vector& dones,
                                const Matrix& next_noise) const {
  const PolicySample next = actor.sample(next_inputs, next_noise, false);
  const Matrix sa = stack_state_action(next_inputs, next.action);
  const Matrix t1 = q1_target.forward(sa);
  const Matrix t2 = q2_target.forward(sa);
  const double a = alpha();
  Vector y(rewards.size());
  for (Eigen::Index b = 0; b < y.size(); ++b) {
    const double soft_v = std::min(t1(0, b), t2(0, b)) - a * next.log_prob(b);
    y(b) = rewards(b) + config_.gamma * (1.0 - dones(b)) * soft_v;
  }
  return y;
}

double SacAgent::critic_loss(const Mlp& q, const Matrix& state_actions, const Vector& targets,
                             std::span<double> grad) {
  MlpCache cache;
  const Matrix out = q.forward(state_actions, cache);
  const auto n = static_cast<double>(targets.size());
  const Matrix diff = out - targets.transpose();
  const double loss = 0.5 * diff.squaredNorm() / n;
  if (!grad.empty()) {
    std::fill(grad.begin(), grad.end(), 0.0);
    q.backward(cache, diff / n, grad);
  }
  return loss;
}

double SacAgent::actor_loss(const Mlp& actor_net, const Matrix& inputs, const Matrix& noise,
                            std::span<double> grad, double* mean_log_prob) const {
  const GaussianPolicyHead head(actor_net);
  const PolicySample s = head.sample(inputs, noise, false);
  const Matrix sa = stack_state_action(inputs, s.action);
  MlpCache c1, c2;
  const Matrix v1 = q1.forward(sa, c1);
  const Matrix v2 = q2.forward(sa, c2);
  const Eigen::Index batch = inputs.cols();
  const auto n = static_cast<double>(batch);
  const double a = alpha();

  double loss = 0.0;
  Matrix g1 = Matrix::Zero(1, batch), g2 = Matrix::Zero(1, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const bool first = v1(0, b) <= v2(0, b);
    loss += a * s.log_prob(b) - (first ? v1(0, b) : v2(0, b));
    (first ? g1 : g2)(0, b) = -1.0 / n;
  }
  loss /= n;
  if (mean_log_prob != nullptr) *mean_log_prob = s.log_prob.mean();

  if (!grad.empty()) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const Matrix gin = input_gradient(q1, c1, g1) + input_gradient(q2, c2, g2);
    const Matrix grad_action = gin.bottomRows(action_dim_);
    const Vector grad_lp = Vector::Constant(batch, a / n);
    head.backward(s, grad_action, grad_lp, grad);
  }
  return loss;
}

double SacAgent::temperature_loss(double la, double mean_log_prob, std::span<double> grad) const {
  const double drive = mean_log_prob + config_.target_entropy;
  if (!grad.empty()) grad[0] = -drive;
  return -la * drive;
}

double SacAgent::update_critics(const Batch& batch, Rng& rng) {
  const Matrix x = normalized(batch.inputs);
  const Matrix nx = normalized(batch.next_inputs);
  const Matrix noise = standard_normal(action_dim_, nx.cols(), rng);
  const Vector y = critic_targets(nx, batch.rewards, batch.dones, noise);
  const Matrix sa = stack_state_action(x, batch.actions);

  ParamVector g1(q1.num_params()), g2(q2.num_params());
  const double l1 = critic_loss(q1, sa, y, g1);
  const double l2 = critic_loss(q2, sa, y, g2);
  adam_step(q1.params(), g1, q1_opt);
  adam_step(q2.params(), g2, q2_opt);
  return 0.5 * (l1 + l2);
}

ActorUpdate SacAgent::update_actor(const Batch& batch, Rng& rng) {
  const Matrix x = normalized(batch.inputs);
  const Matrix noise = standard_normal(action_dim_, x.cols(), rng);
  ParamVector g(actor.net().num_params());
  ActorUpdate out;
  out.loss = actor_loss(actor.net(), x, noise, g, &out.mean_log_prob);
  adam_step(actor.net().params(), g, actor_opt);
  return out;
}

double SacAgent::update_temperature(double mean_log_prob) {
  double g = 0.0;
  temperature_loss(log_alpha, mean_log_prob, std::span<double>(&g, 1));
  adam_step(std::span<double>(&log_alpha, 1), std::span<const double>(&g, 1), alpha_opt);
  return alpha();
}

double SacAgent::update_temperature(const Batch& batch, Rng& rng) {
  const Matrix x = normalized(batch.inputs);
  const PolicySample s = actor.sample(x, rng, false);
  return update_temperature(s.log_prob.mean());
}

void polyak_update(const Mlp& source, Mlp& target, double tau) {
  if (source.layer_sizes() != target.layer_sizes()) {
    fail(ErrorCode::DimensionMismatch, "target network shape differs from its source");
  }
  auto src = source.params();
  auto dst = target.params();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - tau) * dst[i] + tau * src[i];
}

void SacAgent::soft_update_targets() {
  polyak_update(q1, q1_target, config_.tau);
  polyak_update(q2, q2_target, config_.tau);
}

}  // namespace goats
