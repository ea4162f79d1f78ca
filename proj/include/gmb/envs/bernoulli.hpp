#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gmb/envs/environment.hpp"

namespace gmb::envs {

/// K Bernoulli arms whose means are drawn once from Beta(alpha, beta).
class BernoulliBetaEnv final : public Environment {
 public:
  BernoulliBetaEnv(std::size_t arms, double alpha, double beta, std::uint64_t seed)
      : alpha_(alpha), beta_(beta), seed_(seed) {
    if (arms == 0) throw InvalidConfig("Bernoulli environment needs at least one arm");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidConfig("Beta prior parameters must be positive");
    layout_ = SlotLayout({arms});
    Rng rng(seed);
    means_.resize(arms);
    for (double& m : means_) m = rng.beta(alpha, beta);
  }

  /// Fixed arm means, mainly for tests.
  explicit BernoulliBetaEnv(std::vector<double> means) : alpha_(1.0), beta_(1.0), seed_(0), means_(std::move(means)) {
    if (means_.empty()) throw InvalidConfig("Bernoulli environment needs at least one arm");
    for (double m : means_) {
      if (!(m >= 0.0 && m <= 1.0)) throw InvalidConfig("arm mean outside [0, 1]");
    }
    layout_ = SlotLayout({means_.size()});
  }

  std::string family() const override { return "bernoulli"; }
  const SlotLayout& layout() const override { return layout_; }
  std::size_t arms() const noexcept { return means_.size(); }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<double>& arm_means() const noexcept { return means_; }

  Action make_action(std::size_t flat_index) const override {
    if (flat_index >= arms()) throw InvalidAction("arm " + std::to_string(flat_index) + " out of range");
    return ActionId{flat_index};
  }

  std::size_t flat_index(const Action& action) const override {
    const std::size_t a = action_index(action);
    if (a >= arms()) throw InvalidAction("arm " + std::to_string(a) + " out of range");
    return a;
  }

  double mean_reward(const Action& action, const Context&) const override { return means_[flat_index(action)]; }

  double optimal_value(const Context&) const override { return *std::max_element(means_.begin(), means_.end()); }

 private:
  double alpha_;
  double beta_;
  std::uint64_t seed_;
  SlotLayout layout_;
  std::vector<double> means_;
};

inline BernoulliBetaEnv make_bernoulli_env(std::size_t arms, double alpha, double beta, std::uint64_t seed) {
  return BernoulliBetaEnv(arms, alpha, beta, seed);
}

}  // namespace gmb::envs
