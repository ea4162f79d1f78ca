#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/random.hpp"
#include "gmb/core/types.hpp"

namespace gmb::envs {

/// A simulated bandit with Bernoulli rewards. Ground truth is exposed so the
/// harness can compute expected regret.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string family() const = 0;
  virtual std::size_t context_dim() const { return 0; }
  bool contextual() const { return context_dim() > 0; }

  /// Action space as slots; flat K-armed problems have a single slot of size K.
  virtual const SlotLayout& layout() const = 0;
  bool combinatorial() const { return std::holds_alternative<CombinatorialAction>(make_action(0)); }
  std::size_t action_count() const { return layout().cardinality(); }

  /// Action for a flat index (ActionId or the decoded combinatorial action).
  virtual Action make_action(std::size_t flat_index) const = 0;
  virtual std::size_t flat_index(const Action& action) const = 0;

  virtual Context sample_context(Rng& rng) const {
    (void)rng;
    return {};
  }

  /// Success probability of `action` under `context`.
  virtual double mean_reward(const Action& action, const Context& context) const = 0;

  /// max over actions of mean_reward; Unsupported where enumeration is
  /// impractical.
  virtual double optimal_value(const Context& context) const = 0;
  virtual bool has_optimal_value() const { return true; }

  /// Binary reward drawn with probability mean_reward(action, context).
  Reward pull(const Action& action, const Context& context, Rng& rng) const {
    return Reward::binary(rng.bernoulli(mean_reward(action, context)));
  }
};

/// Uniform point on the unit sphere in `dim` dimensions (normalized Gaussian).
inline Context sample_unit_sphere(std::size_t dim, Rng& rng) {
  Context c;
  c.values.resize(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& v : c.values) {
      v = rng.normal();
      norm_sq += v * v;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : c.values) v *= inv;
  return c;
}

}  // namespace gmb::envs
