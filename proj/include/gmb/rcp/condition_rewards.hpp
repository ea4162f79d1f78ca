#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/types.hpp"

namespace gmb::rcp {

/// The low and high reward values the two conditional policies are
/// conditioned on.
struct ConditionRewards {
  double low = 0.0;
  double high = 1.0;
  double q0 = 10.0;
  double q1 = 90.0;
};

/// Empirical quantile (percent in [0, 100]) with linear interpolation between
/// order statistics of `sorted`.
inline double quantile_sorted(std::span<const double> sorted, double percent) {
  if (sorted.empty()) throw NoData("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * percent / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double percent) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, percent);
}

/// Nearest element of `sorted` to `x`; ties go to the smaller value.
inline double nearest_value(std::span<const double> sorted, double x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end()) return sorted.back();
  if (it == sorted.begin()) return *it;
  const double above = *it;
  const double below = *(it - 1);
  return (x - below) <= (above - x) ? below : above;
}

/// Chooses the conditioning rewards for a reward domain.
///
/// binary -> (0, 1); discrete-finite -> (min, max) of `domain_values`, or of
/// the observed rewards when no domain is given; continuous -> q0/q1
/// percentiles of the observed rewards; discrete-unbounded -> those
/// percentiles snapped to the nearest observed value.
inline ConditionRewards select_condition_rewards(std::span<const double> observed, RewardDomain domain, double q0 = 10.0,
                                                 double q1 = 90.0, std::span<const double> domain_values = {}) {
  if (!(q0 > 0.0 && q0 < 100.0 && q1 > 0.0 && q1 < 100.0 && q0 < q1)) {
    throw InvalidConfig("quantile settings need 0 < q0 < q1 < 100");
  }
  ConditionRewards c;
  c.q0 = q0;
  c.q1 = q1;
  switch (domain) {
    case RewardDomain::kBinary:
      c.low = 0.0;
      c.high = 1.0;
      return c;
    case RewardDomain::kDiscreteFinite: {
      std::span<const double> source = domain_values.empty() ? observed : domain_values;
      if (source.empty()) throw NoData("discrete-finite domain without values or observations");
      const auto [lo, hi] = std::minmax_element(source.begin(), source.end());
      c.low = *lo;
      c.high = *hi;
      return c;
    }
    case RewardDomain::kContinuous:
    case RewardDomain::kDiscreteUnbounded: {
      if (observed.empty()) throw NoData("quantile conditioning needs observed rewards");
      std::vector<double> sorted(observed.begin(), observed.end());
      std::sort(sorted.begin(), sorted.end());
      c.low = quantile_sorted(sorted, q0);
      c.high = quantile_sorted(sorted, q1);
      if (domain == RewardDomain::kDiscreteUnbounded) {
        c.low = nearest_value(sorted, c.low);
        c.high = nearest_value(sorted, c.high);
      }
      return c;
    }
  }
  return c;
}

}  // namespace gmb::rcp
