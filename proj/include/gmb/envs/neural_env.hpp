#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gmb/envs/environment.hpp"
#include "gmb/neural/data.hpp"
#include "gmb/neural/dense_net.hpp"

namespace gmb::envs {

/// Ground truth given by a fixed random network:
///   R(a | c) = sigmoid(net([one_hot(a); c]) + shift),
/// with contexts uniform on the unit sphere.
class NeuralValueEnv : public Environment {
 public:
  /// Hidden widths of the ground-truth value network.
  static inline const std::vector<Eigen::Index> kHidden = {64, 64};

  NeuralValueEnv(SlotLayout layout, std::size_t context_dim, double shift, std::uint64_t seed)
      : layout_(std::move(layout)), context_dim_(context_dim), shift_(shift), seed_(seed) {
    if (context_dim_ == 0) throw InvalidConfig("neural environments need a context dimension >= 1");
    net_ = neural::DenseNet(static_cast<Eigen::Index>(layout_.one_hot_width() + context_dim_), kHidden, 1, 0.0, seed);
  }

  std::size_t context_dim() const override { return context_dim_; }
  const SlotLayout& layout() const override { return layout_; }
  double shift() const noexcept { return shift_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Context sample_context(Rng& rng) const override { return sample_unit_sphere(context_dim_, rng); }

  double mean_reward(const Action& action, const Context& context) const override {
    return values({choices_of(action)}, context).front();
  }

  /// Success probabilities for a set of actions under one context.
  std::vector<double> values(const std::vector<std::vector<std::size_t>>& actions, const Context& context) const {
    if (context.dim() != context_dim_) throw InvalidInput("context dimension mismatch");
    for (const auto& a : actions) validate_choices(a);
    const neural::Matrix onehots = neural::one_hot(layout_.sizes(), actions);
    neural::Matrix ctx(static_cast<Eigen::Index>(context_dim_), onehots.cols());
    for (Eigen::Index j = 0; j < ctx.cols(); ++j) {
      for (std::size_t i = 0; i < context_dim_; ++i) ctx(static_cast<Eigen::Index>(i), j) = context.values[i];
    }
    const neural::Matrix logits = net_.infer(neural::vstack(onehots, ctx));
    std::vector<double> out(actions.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = neural::sigmoid(logits(0, static_cast<Eigen::Index>(j)) + shift_);
    return out;
  }

 protected:
  virtual std::vector<std::size_t> choices_of(const Action& action) const = 0;

  void validate_choices(const std::vector<std::size_t>& choices) const {
    if (choices.size() != layout_.slots()) throw InvalidAction("wrong number of action slots");
    for (std::size_t s = 0; s < choices.size(); ++s) {
      if (choices[s] >= layout_.sizes()[s]) throw InvalidAction("action choice out of range");
    }
  }

  SlotLayout layout_;
  std::size_t context_dim_;
  double shift_;
  std::uint64_t seed_;
  neural::DenseNet net_;
};

/// K discrete arms under a d-dimensional context.
class ContextualNeuralEnv final : public NeuralValueEnv {
 public:
  ContextualNeuralEnv(std::size_t arms, std::size_t context_dim, double shift, std::uint64_t seed)
      : NeuralValueEnv(SlotLayout({arms}), context_dim, shift, seed) {}

  std::string family() const override { return "contextual"; }
  std::size_t arms() const { return layout_.cardinality(); }

  Action make_action(std::size_t flat_index) const override {
    if (flat_index >= arms()) throw InvalidAction("arm " + std::to_string(flat_index) + " out of range");
    return ActionId{flat_index};
  }

  std::size_t flat_index(const Action& action) const override {
    const std::size_t a = action_index(action);
    if (a >= arms()) throw InvalidAction("arm " + std::to_string(a) + " out of range");
    return a;
  }

  /// Evaluated through arm_values so that regret against optimal_value is
  /// exactly zero for the best arm.
  double mean_reward(const Action& action, const Context& context) const override {
    return arm_values(context)[flat_index(action)];
  }

  /// Expected reward of every arm under `context`.
  std::vector<double> arm_values(const Context& context) const {
    std::vector<std::vector<std::size_t>> all(arms());
    for (std::size_t a = 0; a < all.size(); ++a) all[a] = {a};
    return values(all, context);
  }

  double optimal_value(const Context& context) const override {
    const std::vector<double> v = arm_values(context);
    return *std::max_element(v.begin(), v.end());
  }

 protected:
  std::vector<std::size_t> choices_of(const Action& action) const override { return {flat_index(action)}; }
};

/// Actions are one choice per slot; the one-hot slots are concatenated.
class CombinatorialEnv final : public NeuralValueEnv {
 public:
  static inline const std::vector<std::size_t> kDefaultSlots = {2, 4, 6, 16, 32};

  CombinatorialEnv(std::vector<std::size_t> slot_sizes, std::size_t context_dim, double shift, std::uint64_t seed)
      : NeuralValueEnv(SlotLayout(std::move(slot_sizes)), context_dim, shift, seed) {}

  std::string family() const override { return "combinatorial"; }

  Action make_action(std::size_t flat_index) const override { return layout_.unflatten(flat_index); }

  std::size_t flat_index(const Action& action) const override {
    const auto* a = std::get_if<CombinatorialAction>(&action);
    if (!a) throw InvalidAction("combinatorial environment needs a combinatorial action");
    return layout_.flatten(*a);
  }

  double optimal_value(const Context&) const override {
    throw Unsupported("optimal value is not computed for combinatorial action spaces; track reward instead");
  }
  bool has_optimal_value() const override { return false; }

 protected:
  std::vector<std::size_t> choices_of(const Action& action) const override {
    const auto* a = std::get_if<CombinatorialAction>(&action);
    if (!a) throw InvalidAction("combinatorial environment needs a combinatorial action");
    return a->choices;
  }
};

}  // namespace gmb::envs
