#pragma once

#include <cstdint>
#include <vector>

#include "gmb/neural/layers.hpp"

namespace gmb::neural {

/// Feedforward network: (Dense -> tanh -> dropout) per hidden layer, then a
/// linear output layer.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(Eigen::Index in, const std::vector<Eigen::Index>& hidden, Eigen::Index out, double dropout_rate,
           std::uint64_t seed)
      : seed_(seed), dropout_rate_(dropout_rate) {
    Rng rng(seed);
    Eigen::Index width = in;
    for (Eigen::Index h : hidden) {
      dense_.emplace_back(width, h, rng);
      tanh_.emplace_back();
      dropout_.emplace_back(dropout_rate);
      width = h;
    }
    dense_.emplace_back(width, out, rng);
  }

  Eigen::Index in_width() const { return dense_.front().in_width(); }
  Eigen::Index out_width() const { return dense_.back().out_width(); }
  double dropout_rate() const noexcept { return dropout_rate_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t hidden_layers() const noexcept { return tanh_.size(); }

  /// Stateless evaluation. `rng` is only drawn from in kSample mode.
  Matrix infer(const Matrix& x, DropoutMode mode, Rng& rng) const {
    Matrix h = x;
    for (std::size_t i = 0; i < tanh_.size(); ++i) {
      h = Tanh::infer(dense_[i].infer(h));
      if (mode == DropoutMode::kSample) h = dropout_[i].sample(h, rng);
    }
    return dense_.back().infer(h);
  }

  Matrix infer(const Matrix& x) const {
    Matrix h = x;
    for (std::size_t i = 0; i < tanh_.size(); ++i) h = Tanh::infer(dense_[i].infer(h));
    return dense_.back().infer(h);
  }

  /// Training pass; caches activations for backward().
  Matrix forward(const Matrix& x, DropoutMode mode, Rng& rng) {
    Matrix h = x;
    for (std::size_t i = 0; i < tanh_.size(); ++i) {
      h = dropout_[i].forward(tanh_[i].forward(dense_[i].forward(h)), mode, rng);
    }
    return dense_.back().forward(h);
  }

  /// Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Matrix backward(const Matrix& dy) {
    Matrix g = dense_.back().backward(dy);
    for (std::size_t i = tanh_.size(); i-- > 0;) {
      g = dense_[i].backward(tanh_[i].backward(dropout_[i].backward(g)));
    }
    return g;
  }

  ParameterList parameters() {
    ParameterList params;
    for (Dense& d : dense_) {
      for (Parameter* p : d.parameters()) params.push_back(p);
    }
    return params;
  }

 private:
  std::uint64_t seed_ = 0;
  double dropout_rate_ = 0.0;
  std::vector<Dense> dense_;
  std::vector<Tanh> tanh_;
  std::vector<Dropout> dropout_;
};

}  // namespace gmb::neural
