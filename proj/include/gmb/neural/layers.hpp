#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmb/core/error.hpp"
#include "gmb/core/random.hpp"

namespace gmb::neural {

/// Activations are stored feature-major: one column per sample.
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

using ParameterList = std::vector<Parameter*>;

enum class DropoutMode { kOff, kSample };

/// Weights ~ N(0, 1/fan_in).
inline Matrix gaussian_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  }
  return m;
}

inline void check_rows(const Matrix& x, Eigen::Index expected, const char* where) {
  if (x.rows() != expected) {
    throw ShapeError(std::string(where) + ": expected " + std::to_string(expected) + " input rows, got " +
                     std::to_string(x.rows()));
  }
}

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// y = W x + b.
class Dense {
 public:
  Dense() = default;
  Dense(Eigen::Index in, Eigen::Index out, Rng& rng)
      : weight(gaussian_init(out, in, rng)), bias(Matrix::Zero(out, 1)) {}

  Eigen::Index in_width() const { return weight.value.cols(); }
  Eigen::Index out_width() const { return weight.value.rows(); }

  Matrix infer(const Matrix& x) const {
    check_rows(x, in_width(), "Dense");
    Matrix y = weight.value * x;
    y.colwise() += bias.value.col(0);
    return y;
  }

  Matrix forward(const Matrix& x) {
    input_ = x;
    return infer(x);
  }

  Matrix backward(const Matrix& dy) {
    weight.grad.noalias() += dy * input_.transpose();
    bias.grad += dy.rowwise().sum();
    return weight.value.transpose() * dy;
  }

  ParameterList parameters() { return {&weight, &bias}; }

  Parameter weight;
  Parameter bias;

 private:
  Matrix input_;
};

class Tanh {
 public:
  static Matrix infer(const Matrix& x) { return x.array().tanh().matrix(); }

  Matrix forward(const Matrix& x) {
    output_ = infer(x);
    return output_;
  }

  Matrix backward(const Matrix& dy) const {
    return (dy.array() * (1.0 - output_.array().square())).matrix();
  }

 private:
  Matrix output_;
};

/// Inverted dropout: kept units are scaled by 1/(1-rate), so kOff is the
/// expectation of kSample.
class Dropout {
 public:
  explicit Dropout(double rate = 0.0) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InvalidConfig("dropout rate must lie in [0, 1)");
  }

  double rate() const noexcept { return rate_; }

  Matrix sample(const Matrix& x, Rng& rng) const {
    if (rate_ == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - rate_);
    Matrix y = x;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) *= rng.uniform() < rate_ ? 0.0 : keep_scale;
    }
    return y;
  }

  Matrix forward(const Matrix& x, DropoutMode mode, Rng& rng) {
    if (mode == DropoutMode::kOff || rate_ == 0.0) {
      mask_.resize(0, 0);
      return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate_);
    mask_.resize(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) mask_(i, j) = rng.uniform() < rate_ ? 0.0 : keep_scale;
    }
    return (x.array() * mask_.array()).matrix();
  }

  Matrix backward(const Matrix& dy) const {
    if (mask_.size() == 0) return dy;
    return (dy.array() * mask_.array()).matrix();
  }

 private:
  double rate_;
  Matrix mask_;
};

enum class InjectionMode { kMultiplicative, kAdditive };

/// Reward conditioning of a hidden layer.
///
/// Multiplicative: out = h * (1 + tanh(u r + v)), so a zero preactivation
/// leaves h unchanged. Additive (ablation): out = h + tanh(u r + v).
class Injection {
 public:
  Injection() = default;
  Injection(Eigen::Index width, Rng& rng, InjectionMode mode = InjectionMode::kMultiplicative)
      : weight(gaussian_init(width, 1, rng)), bias(Matrix::Zero(width, 1)), mode_(mode) {}

  Eigen::Index width() const { return weight.value.rows(); }
  InjectionMode mode() const noexcept { return mode_; }

  /// `r` is a 1 x batch row of conditioning rewards.
  Matrix infer(const Matrix& h, const Matrix& r) const {
    check_rows(h, width(), "Injection");
    if (r.rows() != 1 || r.cols() != h.cols()) throw ShapeError("Injection: reward row does not match batch");
    Matrix gate = gate_tanh(r);
    if (mode_ == InjectionMode::kAdditive) return h + gate;
    return (h.array() * (1.0 + gate.array())).matrix();
  }

  Matrix forward(const Matrix& h, const Matrix& r) {
    check_rows(h, width(), "Injection");
    if (r.rows() != 1 || r.cols() != h.cols()) throw ShapeError("Injection: reward row does not match batch");
    hidden_ = h;
    reward_ = r;
    gate_ = gate_tanh(r);
    if (mode_ == InjectionMode::kAdditive) return h + gate_;
    return (h.array() * (1.0 + gate_.array())).matrix();
  }

  /// Returns the gradient with respect to the hidden input.
  Matrix backward(const Matrix& dy) {
    Matrix dgate;
    Matrix dh;
    if (mode_ == InjectionMode::kAdditive) {
      dh = dy;
      dgate = dy;
    } else {
      dh = (dy.array() * (1.0 + gate_.array())).matrix();
      dgate = (dy.array() * hidden_.array()).matrix();
    }
    const Matrix dpre = (dgate.array() * (1.0 - gate_.array().square())).matrix();
    weight.grad.noalias() += dpre * reward_.transpose();
    bias.grad += dpre.rowwise().sum();
    return dh;
  }

  ParameterList parameters() { return {&weight, &bias}; }

  Parameter weight;
  Parameter bias;

 private:
  Matrix gate_tanh(const Matrix& r) const {
    Matrix pre = weight.value * r;
    pre.colwise() += bias.value.col(0);
    return pre.array().tanh().matrix();
  }

  InjectionMode mode_ = InjectionMode::kMultiplicative;
  Matrix hidden_;
  Matrix reward_;
  Matrix gate_;
};

/// Column-wise softmax.
inline Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double peak = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - peak).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

/// One softmax head per action slot, sharing the input features.
class CategoricalHeads {
 public:
  CategoricalHeads() = default;
  CategoricalHeads(Eigen::Index in, const std::vector<std::size_t>& slot_sizes, Rng& rng) {
    heads_.reserve(slot_sizes.size());
    for (std::size_t s : slot_sizes) heads_.emplace_back(in, static_cast<Eigen::Index>(s), rng);
  }

  std::size_t slots() const noexcept { return heads_.size(); }

  std::vector<Matrix> infer(const Matrix& h) const {
    std::vector<Matrix> probs;
    probs.reserve(heads_.size());
    for (const Dense& head : heads_) probs.push_back(softmax_columns(head.infer(h)));
    return probs;
  }

  /// Mean negative log-likelihood of `targets` (targets[slot][sample]).
  /// Fills parameter gradients and returns the gradient w.r.t. `h`.
  double forward_backward(const Matrix& h, const std::vector<std::vector<std::size_t>>& targets, Matrix& dh,
                          std::vector<double>* per_sample_log_lik = nullptr) {
    if (targets.size() != heads_.size()) throw ShapeError("CategoricalHeads: wrong number of target slots");
    const auto batch = h.cols();
    const double inv_batch = 1.0 / static_cast<double>(batch);
    dh = Matrix::Zero(h.rows(), batch);
    if (per_sample_log_lik) per_sample_log_lik->assign(static_cast<std::size_t>(batch), 0.0);
    double loss = 0.0;
    for (std::size_t s = 0; s < heads_.size(); ++s) {
      Matrix probs = softmax_columns(heads_[s].forward(h));
      Matrix dlogits = probs;
      for (Eigen::Index j = 0; j < batch; ++j) {
        const auto target = static_cast<Eigen::Index>(targets[s][static_cast<std::size_t>(j)]);
        if (target >= probs.rows()) throw ShapeError("CategoricalHeads: target out of range");
        const double log_p = std::log(std::max(probs(target, j), 1e-300));
        loss -= log_p;
        if (per_sample_log_lik) (*per_sample_log_lik)[static_cast<std::size_t>(j)] += log_p;
        dlogits(target, j) -= 1.0;
      }
      dlogits *= inv_batch;
      dh += heads_[s].backward(dlogits);
    }
    return loss * inv_batch;
  }

  ParameterList parameters() {
    ParameterList params;
    for (Dense& head : heads_) {
      for (Parameter* p : head.parameters()) params.push_back(p);
    }
    return params;
  }

 private:
  std::vector<Dense> heads_;
};

/// Diagonal Gaussian: mu = W_mu h + b_mu, sigma = softplus(W_rho h + b_rho).
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(Eigen::Index in, Eigen::Index latent, Rng& rng) : mu_(in, latent, rng), rho_(in, latent, rng) {}

  Eigen::Index latent() const { return mu_.out_width(); }

  void infer(const Matrix& h, Matrix& mu, Matrix& sigma) const {
    mu = mu_.infer(h);
    sigma = rho_.infer(h).unaryExpr([](double x) { return softplus(x); });
  }

  void forward(const Matrix& h, Matrix& mu, Matrix& sigma) {
    mu = mu_.forward(h);
    rho_value_ = rho_.forward(h);
    sigma = rho_value_.unaryExpr([](double x) { return softplus(x); });
  }

  Matrix backward(const Matrix& dmu, const Matrix& dsigma) {
    const Matrix drho = (dsigma.array() * rho_value_.unaryExpr([](double x) { return sigmoid(x); }).array()).matrix();
    return mu_.backward(dmu) + rho_.backward(drho);
  }

  ParameterList parameters() { return {&mu_.weight, &mu_.bias, &rho_.weight, &rho_.bias}; }

 private:
  Dense mu_;
  Dense rho_;
  Matrix rho_value_;
};

/// KL(N(mu, sigma^2) || N(0, 1)) summed over latent coordinates, per column.
inline RowVector gaussian_kl(const Matrix& mu, const Matrix& sigma) {
  return (0.5 * (mu.array().square() + sigma.array().square() - 1.0) - sigma.array().log())
      .matrix()
      .colwise()
      .sum();
}

}  // namespace gmb::neural
