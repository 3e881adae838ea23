#include "goats/tinynn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "goats/error.hpp"

namespace goats {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - tanh(u)^2) without cancellation.
double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

double sech_sq(double u) {
  const double c = std::cosh(u);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

const double kActionBound = std::nextafter(1.0, 0.0);

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) fail(ErrorCode::InvalidArgument, "an MLP needs at least two layer sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) fail(ErrorCode::InvalidArgument, "layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::initialized(std::vector<int> layer_sizes, Rng& rng, double final_layer_scale) {
  Mlp net(std::move(layer_sizes));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const bool last = l + 1 == net.num_layers();
    const double bound = (last ? final_layer_scale : 1.0) / std::sqrt(static_cast<double>(net.sizes_[l]));
    auto w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = bound * unit(rng);
    }
    auto b = net.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = last ? 0.0 : bound * unit(rng);
  }
  return net;
}

RowMajorMap Mlp::weight(std::size_t layer) {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

ConstRowMajorMap Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Vector> Mlp::bias(std::size_t layer) {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

Eigen::Map<const Vector> Mlp::bias(std::size_t layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

void Mlp::check_input(Eigen::Index rows) const {
  if (rows != input_dim()) {
    std::ostringstream os;
    os << "MLP expects input dimension " << input_dim() << ", got " << rows;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  check_input(x.rows());
  Matrix a = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix Mlp::forward(const Matrix& x, MlpCache& cache) const {
  check_input(x.rows());
  cache.activations.resize(num_layers());
  cache.activations[0] = x;
  Matrix out;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * cache.activations[l];
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) {
      cache.activations[l + 1] = z.cwiseMax(0.0);
    } else {
      out = std::move(z);
    }
  }
  return out;
}

Vector Mlp::forward(const Vector& x) const {
  Matrix m = x;
  return forward(m).col(0);
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& grad_out, std::span<double> grad) const {
  if (grad.size() != params_.size()) fail(ErrorCode::DimensionMismatch, "gradient buffer size mismatch");
  if (cache.activations.size() != num_layers()) fail(ErrorCode::InvalidArgument, "stale forward cache");
  if (grad_out.rows() != output_dim() || grad_out.cols() != cache.activations[0].cols()) {
    fail(ErrorCode::DimensionMismatch, "output gradient has the wrong shape");
  }
  Matrix g = grad_out;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const Matrix& a = cache.activations[l];
    RowMajorMap gw(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Vector> gb(grad.data() + bias_offset(l), sizes_[l + 1]);
    gw.noalias() += g * a.transpose();
    gb.noalias() += g.rowwise().sum();
    Matrix gin = weight(l).transpose() * g;
    if (l > 0) gin = gin.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    g = std::move(gin);
  }
  return g;
}

MlpGradients backward(const Mlp& net, const Matrix& x, const Matrix& grad_out) {
  MlpCache cache;
  net.forward(x, cache);
  MlpGradients out;
  out.params.assign(net.num_params(), 0.0);
  out.input = net.backward(cache, grad_out, out.params);
  return out;
}

// ---- policy head ------------------------------------------------------------

GaussianPolicyHead::GaussianPolicyHead(int input_dim, int action_dim, const std::vector<int>& hidden,
                                       Rng& rng, double final_layer_scale) {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * action_dim);
  net_ = Mlp::initialized(std::move(sizes), rng, final_layer_scale);
}

GaussianPolicyHead::GaussianPolicyHead(Mlp net) : net_(std::move(net)) {
  if (net_.output_dim() % 2 != 0) fail(ErrorCode::InvalidArgument, "policy net needs an even output size");
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

PolicySample GaussianPolicyHead::sample(const Matrix& obs, Rng& rng, bool deterministic) const {
  if (deterministic) return sample(obs, Matrix::Zero(action_dim(), obs.cols()), true);
  return sample(obs, standard_normal(action_dim(), obs.cols(), rng), false);
}

PolicySample GaussianPolicyHead::sample(const Matrix& obs, const Matrix& noise, bool deterministic) const {
  const Eigen::Index a = action_dim();
  const Eigen::Index batch = obs.cols();
  PolicySample s;
  const Matrix out = net_.forward(obs, s.cache);
  s.mean = out.topRows(a);
  s.raw_log_std = out.bottomRows(a);
  s.log_std = s.raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.noise = deterministic ? Matrix::Zero(a, batch) : noise;
  if (s.noise.rows() != a || s.noise.cols() != batch) {
    fail(ErrorCode::DimensionMismatch, "policy noise has the wrong shape");
  }
  s.pre_tanh = s.mean.array() + s.log_std.array().exp() * s.noise.array();
  s.action.resize(a, batch);
  s.log_prob.resize(batch);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index b = 0; b < batch; ++b) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < a; ++i) {
      const double u = s.pre_tanh(i, b);
      const double e = s.noise(i, b);
      lp += -0.5 * e * e - s.log_std(i, b) - half_log_2pi;
      lp -= log_one_minus_tanh_sq(u);
      s.action(i, b) = std::clamp(std::tanh(u), -kActionBound, kActionBound);
    }
    s.log_prob(b) = lp;
  }
  return s;
}

void GaussianPolicyHead::backward(const PolicySample& s, const Matrix& grad_action,
                                  const Vector& grad_log_prob, std::span<double> grad) const {
  const Eigen::Index a = action_dim();
  const Eigen::Index batch = s.action.cols();
  Matrix g_out(2 * a, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double gl = grad_log_prob(b);
    for (Eigen::Index i = 0; i < a; ++i) {
      const double u = s.pre_tanh(i, b);
      const double sd = std::exp(s.log_std(i, b));
      const double e = s.noise(i, b);
      // d action / d u, and d log_prob / d u through the squashing term.
      const double da_du = sech_sq(u);
      const double dlp_du = 2.0 * std::tanh(u);
      const double gu = grad_action(i, b) * da_du + gl * dlp_du;
      g_out(i, b) = gu;
      const double raw = s.raw_log_std(i, b);
      const bool active = raw >= kLogStdMin && raw <= kLogStdMax;
      g_out(a + i, b) = active ? gu * sd * e - gl : 0.0;
    }
  }
  net_.backward(s.cache, g_out, grad);
}

SquashedSample sample_squashed_gaussian(const GaussianPolicyHead& head, std::span<const double> obs,
                                        Rng& rng, bool deterministic) {
  Matrix x(static_cast<Eigen::Index>(obs.size()), 1);
  for (std::size_t i = 0; i < obs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = obs[i];
  PolicySample s = head.sample(x, rng, deterministic);
  SquashedSample out;
  out.action.assign(s.action.data(), s.action.data() + s.action.size());
  out.log_prob = s.log_prob(0);
  return out;
}

// ---- Adam -------------------------------------------------------------------

AdamState AdamState::zeros(std::size_t n, double lr) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.lr = lr;
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    fail(ErrorCode::DimensionMismatch, "Adam parameter, gradient and moment sizes differ");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// ---- finite differences -------------------------------------------------------

GradCheckReport finite_diff_check(const LossFn& loss, std::span<const double> params,
                                  const std::vector<ParamBlock>& blocks, double h, double tol) {
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> analytic(p.size(), 0.0);
  loss(p, analytic);

  GradCheckReport report;
  for (const auto& block : blocks) {
    if (block.offset + block.size > p.size()) fail(ErrorCode::OutOfRange, "parameter block out of range");
    BlockError err{block.name, 0.0, block.offset};
    for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = loss(p, {});
      p[i] = saved - h;
      const double down = loss(p, {});
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      if (rel > err.max_rel_error) {
        err.max_rel_error = rel;
        err.worst_index = i;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, err.max_rel_error);
    report.blocks.push_back(err);
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

std::vector<ParamBlock> layer_blocks(const Mlp& net, const std::string& name, std::size_t base_offset) {
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto rows = static_cast<std::size_t>(net.layer_sizes()[l + 1]);
    const auto cols = static_cast<std::size_t>(net.layer_sizes()[l]);
    blocks.push_back({name + ".W" + std::to_string(l), base_offset + net.weight_offset(l), rows * cols});
    blocks.push_back({name + ".b" + std::to_string(l), base_offset + net.bias_offset(l), rows});
  }
  return blocks;
}

}  // namespace goats
