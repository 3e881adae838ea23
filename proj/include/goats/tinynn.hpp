#pragma once

// Dense networks with hand-written reverse mode, a tanh-squashed Gaussian
// policy head, Adam, and a central-difference gradient checker.
//
// Batches are column-major Eigen matrices: one column per sample. Network
// parameters live in a single flat array so optimizers, Polyak averaging and
// checkpoints can treat every network the same way. Each layer stores its
// weight matrix (out x in, row-major) followed by its bias.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "goats/goaldist.hpp"

namespace goats {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
// Flat parameter and gradient storage. Aligned so vectorized reductions over
// layer blocks take the same path for every copy of a network.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

struct MlpCache {
  // activations[0] is the input; activations[l] the ReLU output of layer l-1.
  std::vector<Matrix> activations;
};

/// Affine layers with ReLU between them and an identity output.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network with the given layer widths (input first).
  explicit Mlp(std::vector<int> layer_sizes);

  /// Fan-in uniform initialization; the last layer's bound is multiplied by
  /// `final_layer_scale` and its bias starts at zero.
  static Mlp initialized(std::vector<int> layer_sizes, Rng& rng, double final_layer_scale);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1] * sizes_[layer]);
  }
  RowMajorMap weight(std::size_t layer);
  ConstRowMajorMap weight(std::size_t layer) const;
  Eigen::Map<Vector> bias(std::size_t layer);
  Eigen::Map<const Vector> bias(std::size_t layer) const;

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpCache& cache) const;
  Vector forward(const Vector& x) const;

  /// Accumulates parameter gradients into `grad` (length num_params()) and
  /// returns the gradient with respect to the input batch.
  Matrix backward(const MlpCache& cache, const Matrix& grad_out, std::span<double> grad) const;

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.sizes_ == b.sizes_ && a.params_ == b.params_;
  }

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  ParamVector params_;
};

struct MlpGradients {
  ParamVector params;
  Matrix input;
};

/// Recomputes the forward pass and returns parameter and input gradients.
MlpGradients backward(const Mlp& net, const Matrix& x, const Matrix& grad_out);

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Everything the reverse pass needs from a policy sample.
struct PolicySample {
  Matrix action;    // tanh(u), a x B
  Vector log_prob;  // B
  Matrix pre_tanh;  // u
  Matrix mean;
  Matrix log_std;   // clamped
  Matrix raw_log_std;
  Matrix noise;     // standard normal draws (zero when deterministic)
  MlpCache cache;
};

/// Squashed Gaussian policy. The network's output rows [0, a) are the mean
/// head and rows [a, 2a) the log-std head over a shared ReLU trunk.
class GaussianPolicyHead {
 public:
  GaussianPolicyHead() = default;
  GaussianPolicyHead(int input_dim, int action_dim, const std::vector<int>& hidden, Rng& rng,
                     double final_layer_scale);
  explicit GaussianPolicyHead(Mlp net);

  int action_dim() const { return net_.output_dim() / 2; }
  int input_dim() const { return net_.input_dim(); }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  /// Reparameterized sample with caller-provided standard normal noise
  /// (a x B). With `deterministic`, u = mean and the noise is ignored.
  PolicySample sample(const Matrix& obs, const Matrix& noise, bool deterministic) const;
  PolicySample sample(const Matrix& obs, Rng& rng, bool deterministic) const;

  /// Accumulates parameter gradients of sum_b(gA[:,b] . action[:,b] + gL[b] * log_prob[b]).
  void backward(const PolicySample& s, const Matrix& grad_action, const Vector& grad_log_prob,
                std::span<double> grad) const;

 private:
  Mlp net_;
};

struct SquashedSample {
  std::vector<double> action;
  double log_prob;
};

SquashedSample sample_squashed_gaussian(const GaussianPolicyHead& head, std::span<const double> obs,
                                        Rng& rng, bool deterministic);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(std::size_t n, double lr);
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// ---- finite differences ---------------------------------------------------

/// Loss over a flat parameter vector. When `grad` is nonempty the callee
/// writes the analytic gradient into it.
using LossFn = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct BlockError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradCheckReport {
  std::vector<BlockError> blocks;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Denominator floor for the relative error, so gradient entries that are
/// pure rounding noise do not dominate the report.
inline constexpr double kGradCheckFloor = 1e-6;

/// Central differences with step h against the analytic gradient. Relative
/// error per entry is |a - n| / max(|a|, |n|, kGradCheckFloor).
GradCheckReport finite_diff_check(const LossFn& loss, std::span<const double> params,
                                  const std::vector<ParamBlock>& blocks, double h, double tol);

/// One block per weight matrix and bias vector, prefixed with `name`.
std::vector<ParamBlock> layer_blocks(const Mlp& net, const std::string& name,
                                     std::size_t base_offset = 0);

}  // namespace goats
