#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "gmb/core/error.hpp"

namespace gmb {

/// Index of one of K discrete actions.
struct ActionId {
  std::size_t index = 0;
  friend bool operator==(const ActionId&, const ActionId&) = default;
};

/// One choice per slot; choice i lies in [0, slot_sizes[i]).
struct CombinatorialAction {
  std::vector<std::size_t> choices;
  friend bool operator==(const CombinatorialAction&, const CombinatorialAction&) = default;
};

using Action = std::variant<ActionId, CombinatorialAction>;

/// Mixed-radix codec between combinatorial actions and flat indices.
/// Slot 0 is the most significant digit.
class SlotLayout {
 public:
  SlotLayout() = default;
  explicit SlotLayout(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw InvalidConfig("slot layout needs at least one slot");
    for (std::size_t s : sizes_) {
      if (s == 0) throw InvalidConfig("slot size must be positive");
    }
  }

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t slots() const noexcept { return sizes_.size(); }

  std::size_t cardinality() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{1}, std::multiplies<>());
  }

  /// Width of the concatenated one-hot encoding.
  std::size_t one_hot_width() const { return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0}); }

  void validate(const CombinatorialAction& a) const {
    if (a.choices.size() != sizes_.size()) throw InvalidAction("wrong number of slots");
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (a.choices[i] >= sizes_[i]) {
        throw InvalidAction("slot " + std::to_string(i) + " choice " + std::to_string(a.choices[i]) +
                            " out of range");
      }
    }
  }

  std::size_t flatten(const CombinatorialAction& a) const {
    validate(a);
    std::size_t index = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) index = index * sizes_[i] + a.choices[i];
    return index;
  }

  CombinatorialAction unflatten(std::size_t index) const {
    if (index >= cardinality()) throw InvalidAction("flat index out of range");
    CombinatorialAction a;
    a.choices.resize(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      a.choices[i] = index % sizes_[i];
      index /= sizes_[i];
    }
    return a;
  }

 private:
  std::vector<std::size_t> sizes_;
};

/// Real context vector; empty for non-contextual problems.
struct Context {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  double norm() const {
    return std::sqrt(std::inner_product(values.begin(), values.end(), values.begin(), 0.0));
  }
  friend bool operator==(const Context&, const Context&) = default;
};

enum class RewardDomain { kBinary, kDiscreteFinite, kDiscreteUnbounded, kContinuous };

/// A reward value with its domain tag. Binary rewards are 0 or 1.
struct Reward {
  double value = 0.0;
  RewardDomain domain = RewardDomain::kBinary;

  static Reward binary(bool success) { return {success ? 1.0 : 0.0, RewardDomain::kBinary}; }

  void validate() const {
    if (!std::isfinite(value)) throw InvalidReward("reward is not finite");
    if (domain == RewardDomain::kBinary && value != 0.0 && value != 1.0) {
      throw InvalidReward("binary reward must be 0 or 1, got " + std::to_string(value));
    }
  }
  friend bool operator==(const Reward&, const Reward&) = default;
};

/// One logged interaction. `propensity` is the probability the acting
/// policy assigned to the action it took.
struct Observation {
  Context context;
  Action action;
  Reward reward;
  double propensity = 1.0;

  void validate() const {
    reward.validate();
    if (!(propensity > 0.0 && propensity <= 1.0)) {
      throw InvalidPropensity("propensity " + std::to_string(propensity) + " outside (0, 1]");
    }
  }
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Index of a flat (non-combinatorial) action; throws for combinatorial actions.
inline std::size_t action_index(const Action& a) {
  if (const auto* id = std::get_if<ActionId>(&a)) return id->index;
  throw InvalidAction("expected a flat action id");
}

}  // namespace gmb
