#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/types.hpp"
#include "gmb/rcp/condition_rewards.hpp"

namespace gmb::rcp {

/// Tabular reward-conditioned policy for non-contextual bandits: action
/// counts per reward condition, with additive smoothing.
class CountingRcp {
 public:
  CountingRcp(std::size_t arms, double smoothing = 1.0, ConditionRewards conditions = {})
      : smoothing_(smoothing), conditions_(conditions), low_(arms, 0.0), high_(arms, 0.0) {
    if (arms == 0) throw InvalidConfig("counting RCP needs at least one arm");
    if (!(smoothing >= 0.0)) throw InvalidConfig("smoothing must be >= 0");
    if (conditions.low > conditions.high) throw InvalidConfig("low condition above high condition");
  }

  std::size_t arms() const noexcept { return low_.size(); }
  double smoothing() const noexcept { return smoothing_; }
  const ConditionRewards& conditions() const noexcept { return conditions_; }
  const std::vector<double>& low_counts() const noexcept { return low_; }
  const std::vector<double>& high_counts() const noexcept { return high_; }

  /// Counts each observation under the condition matching its reward.
  void update(std::span<const Observation> batch) {
    for (const Observation& obs : batch) {
      const std::size_t a = action_index(obs.action);
      if (a >= arms()) throw InvalidAction("action " + std::to_string(a) + " out of range");
      table_for(obs.reward.value)[a] += 1.0;
    }
  }

  /// normalize(counts_r + smoothing).
  ProbabilityVector policy(double reward) const {
    const std::vector<double>& counts = table_for(reward);
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) w[i] = counts[i] + smoothing_;
    return normalize(w);
  }

  ProbabilityVector low_policy() const { return policy(conditions_.low); }
  ProbabilityVector high_policy() const { return policy(conditions_.high); }

 private:
  const std::vector<double>& table_for(double reward) const {
    if (reward == conditions_.high) return high_;
    if (reward == conditions_.low) return low_;
    throw InvalidReward("reward " + std::to_string(reward) + " matches neither condition");
  }

  std::vector<double>& table_for(double reward) {
    return const_cast<std::vector<double>&>(std::as_const(*this).table_for(reward));
  }

  double smoothing_;
  ConditionRewards conditions_;
  std::vector<double> low_;
  std::vector<double> high_;
};

}  // namespace gmb::rcp
