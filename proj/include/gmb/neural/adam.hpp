#pragma once

#include <cmath>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::neural {

/// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit Adam(double learning_rate = 1e-3) : lr_(learning_rate) {}

  double learning_rate() const noexcept { return lr_; }
  long steps() const noexcept { return t_; }

  /// Applies one update from the accumulated gradients. Throws
  /// TrainingDiverged if any gradient is not finite; parameters are then
  /// left untouched.
  void step(const ParameterList& params) {
    if (first_.empty()) {
      for (const Parameter* p : params) {
        first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      }
    }
    if (first_.size() != params.size()) throw ShapeError("Adam: parameter list changed between steps");
    for (const Parameter* p : params) {
      if (!p->grad.allFinite()) throw TrainingDiverged("non-finite gradient");
    }
    ++t_;
    const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Parameter& p = *params[i];
      if (p.grad.rows() != first_[i].rows() || p.grad.cols() != first_[i].cols()) {
        throw ShapeError("Adam: gradient shape mismatch");
      }
      first_[i] = kBeta1 * first_[i] + (1.0 - kBeta1) * p.grad;
      second_[i] = kBeta2 * second_[i] + (1.0 - kBeta2) * p.grad.cwiseAbs2();
      p.value.array() -= lr_ * (first_[i].array() / correction1) /
                         ((second_[i].array() / correction2).sqrt() + kEpsilon);
    }
  }

 private:
  double lr_;
  long t_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

inline void zero_grad(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace gmb::neural
