#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::neural {

/// One training example: per-slot action choices, context, scalar reward.
/// Flat K-action problems use a single slot.
struct Sample {
  std::vector<std::size_t> choices;
  std::vector<double> context;
  double reward = 0.0;
};

/// Hyperparameters shared by the neural training loops.
struct TrainConfig {
  long steps = 3000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double kl_weight = 0.5;
  double dropout = 0.1;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (steps < 1) throw InvalidConfig("train steps must be >= 1");
    if (batch_size < 1) throw InvalidConfig("batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidConfig("learning rate must be positive");
    if (!(kl_weight >= 0.0)) throw InvalidConfig("KL weight must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidConfig("dropout must lie in [0, 1)");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw InvalidConfig("holdout fraction must lie in [0, 1)");
  }
};

/// Concatenated per-slot one-hot encodings, one column per choice vector.
inline Matrix one_hot(const std::vector<std::size_t>& slot_sizes, std::span<const std::vector<std::size_t>> choices) {
  std::size_t width = 0;
  for (std::size_t s : slot_sizes) width += s;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(choices.size()));
  for (std::size_t j = 0; j < choices.size(); ++j) {
    if (choices[j].size() != slot_sizes.size()) throw ShapeError("one_hot: wrong number of slots");
    std::size_t offset = 0;
    for (std::size_t s = 0; s < slot_sizes.size(); ++s) {
      if (choices[j][s] >= slot_sizes[s]) throw ShapeError("one_hot: choice out of range");
      out(static_cast<Eigen::Index>(offset + choices[j][s]), static_cast<Eigen::Index>(j)) = 1.0;
      offset += slot_sizes[s];
    }
  }
  return out;
}

/// Context columns; all contexts must share `dim`.
inline Matrix context_matrix(std::size_t dim, std::span<const std::vector<double>* const> contexts) {
  Matrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(contexts.size()));
  for (std::size_t j = 0; j < contexts.size(); ++j) {
    if (contexts[j]->size() != dim) throw ShapeError("context dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*contexts[j])[i];
  }
  return out;
}

/// Stacks `top` above `bottom` (same number of columns).
inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw ShapeError("vstack column mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

/// Matrices for a subset of samples.
struct Batch {
  Matrix actions;   // one-hot, width = sum of slot sizes
  Matrix contexts;  // context_dim rows
  Matrix rewards;   // 1 x batch
  std::vector<std::vector<std::size_t>> targets;  // targets[slot][sample]

  static Batch gather(const std::vector<std::size_t>& slot_sizes, std::size_t context_dim,
                      const std::vector<Sample>& samples, std::span<const std::size_t> indices) {
    Batch b;
    std::vector<std::vector<std::size_t>> choices;
    std::vector<const std::vector<double>*> contexts;
    choices.reserve(indices.size());
    contexts.reserve(indices.size());
    b.rewards.resize(1, static_cast<Eigen::Index>(indices.size()));
    b.targets.assign(slot_sizes.size(), std::vector<std::size_t>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const Sample& s = samples.at(indices[j]);
      choices.push_back(s.choices);
      contexts.push_back(&s.context);
      b.rewards(0, static_cast<Eigen::Index>(j)) = s.reward;
      for (std::size_t k = 0; k < slot_sizes.size() && k < s.choices.size(); ++k) b.targets[k][j] = s.choices[k];
    }
    b.actions = one_hot(slot_sizes, choices);
    b.contexts = context_matrix(context_dim, contexts);
    return b;
  }

  Eigen::Index size() const { return rewards.cols(); }
};

}  // namespace gmb::neural
