#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/types.hpp"

namespace gmb::gm {

/// Slack allowed below zero when checking mixture feasibility, relative to
/// max(1, |lambda|).
inline constexpr double kFeasibilitySlack = 1e-12;

/// Feasible interval [lower, upper] of the mixing weight lambda, i.e. the
/// lambdas for which (1 - lambda) p0 + lambda p1 is nonnegative.
struct LambdaBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double lambda) const { return lambda >= lower && lambda <= upper; }
};

/// Weights (w0, w1) = (1 - lambda, lambda) over the low/high reward conditions.
struct WeightFunction {
  double lambda = 1.0;
  double w0() const { return 1.0 - lambda; }
  double w1() const { return lambda; }
};

enum class Strategy { kOptimized, kOptimistic, kSubMax, kNegative };

inline void check_same_length(const ProbabilityVector& p0, const ProbabilityVector& p1) {
  if (p0.size() != p1.size()) {
    throw InvalidInput("policy lengths differ: " + std::to_string(p0.size()) + " vs " + std::to_string(p1.size()));
  }
}

/// Each coordinate constrains p0_i + lambda (p1_i - p0_i) >= 0: a positive
/// difference yields a lower bound, a negative one an upper bound.
inline LambdaBounds lambda_bounds(const ProbabilityVector& p0, const ProbabilityVector& p1) {
  check_same_length(p0, p1);
  LambdaBounds bounds;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    const double diff = p1[i] - p0[i];
    if (diff > 0.0) {
      bounds.lower = std::max(bounds.lower, -p0[i] / diff);
    } else if (diff < 0.0) {
      bounds.upper = std::min(bounds.upper, -p0[i] / diff);
    }
  }
  return bounds;
}

/// Entrywise (1 - lambda) p0 + lambda p1. Entries within rounding slack of
/// zero are clipped; anything more negative throws InfeasibleLambda.
inline ProbabilityVector mix(const ProbabilityVector& p0, const ProbabilityVector& p1, double lambda) {
  check_same_length(p0, p1);
  if (lambda == 0.0) return p0;
  if (lambda == 1.0) return p1;
  const double slack = kFeasibilitySlack * std::max(1.0, std::abs(lambda));
  std::vector<double> out(p0.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    double v = p0[i] + lambda * (p1[i] - p0[i]);
    if (v < 0.0) {
      if (v < -slack) {
        throw InfeasibleLambda("lambda " + std::to_string(lambda) + " makes entry " + std::to_string(i) +
                               " equal " + std::to_string(v));
      }
      v = 0.0;
    }
    out[i] = v;
    total += v;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance / 2) {
    for (double& v : out) v /= total;
  }
  return ProbabilityVector(std::move(out));
}

/// Slope in lambda of the importance-sampling estimate
///   R(lambda) = 1/N sum_i [(1 - lambda) pi0(a_i|c_i) + lambda pi1(a_i|c_i)] r_i / q_i.
/// `pi0` and `pi1` map an observation to the conditional probability of its
/// logged action under its logged context.
template <typename Pi0, typename Pi1>
double is_coefficient(std::span<const Observation> data, Pi0&& pi0, Pi1&& pi1) {
  if (data.empty()) throw NoData("importance-sampling estimate needs data");
  double sum = 0.0;
  for (const Observation& obs : data) {
    if (!(obs.propensity > 0.0)) throw InvalidPropensity("propensity must be positive");
    if (obs.reward.value == 0.0) continue;
    sum += (pi1(obs) - pi0(obs)) * obs.reward.value / obs.propensity;
  }
  return sum / static_cast<double>(data.size());
}

/// The full importance-sampling estimate R(lambda), summed directly.
template <typename Pi0, typename Pi1>
double is_estimate(std::span<const Observation> data, Pi0&& pi0, Pi1&& pi1, double lambda) {
  if (data.empty()) throw NoData("importance-sampling estimate needs data");
  double sum = 0.0;
  for (const Observation& obs : data) {
    if (!(obs.propensity > 0.0)) throw InvalidPropensity("propensity must be positive");
    sum += (pi0(obs) / obs.propensity) * (1.0 - lambda) * obs.reward.value +
           (pi1(obs) / obs.propensity) * lambda * obs.reward.value;
  }
  return sum / static_cast<double>(data.size());
}

/// Lambda maximizing a linear objective with slope `coefficient` over the
/// feasible interval. Zero slope or an unbounded direction falls back to 1.
inline double optimal_lambda(const LambdaBounds& bounds, double coefficient) {
  if (coefficient > 0.0 && std::isfinite(bounds.upper)) return bounds.upper;
  if (coefficient < 0.0 && std::isfinite(bounds.lower)) return bounds.lower;
  return 1.0;
}

struct OptimizedPolicy {
  ProbabilityVector policy;
  double lambda;
  double coefficient;
  LambdaBounds bounds;
};

inline OptimizedPolicy optimized_policy(const ProbabilityVector& p0, const ProbabilityVector& p1, double coefficient) {
  const LambdaBounds bounds = lambda_bounds(p0, p1);
  const double lambda = optimal_lambda(bounds, coefficient);
  return {mix(p0, p1, lambda), lambda, coefficient, bounds};
}

template <typename Pi0, typename Pi1>
OptimizedPolicy optimized_policy(const ProbabilityVector& p0, const ProbabilityVector& p1,
                                 std::span<const Observation> data, Pi0&& pi0, Pi1&& pi1) {
  return optimized_policy(p0, p1, is_coefficient(data, pi0, pi1));
}

/// The high-reward conditional itself (w0 = 0, w1 = 1).
inline ProbabilityVector optimistic_policy(const ProbabilityVector& p1) { return p1; }

/// normalize(max(p1 - p0, 0)); returns p1 when no coordinate of p1 exceeds p0.
inline ProbabilityVector submax_policy(const ProbabilityVector& p0, const ProbabilityVector& p1) {
  check_same_length(p0, p1);
  std::vector<double> positive(p0.size());
  bool any = false;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    positive[i] = std::max(p1[i] - p0[i], 0.0);
    any = any || positive[i] > 0.0;
  }
  if (!any) return p1;
  return normalize(positive);
}

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kOptimized: return "optimized";
    case Strategy::kOptimistic: return "optimistic";
    case Strategy::kSubMax: return "submax";
    case Strategy::kNegative: return "negative";
  }
  return "unknown";
}

inline Strategy parse_strategy(const std::string& name) {
  if (name == "optimized") return Strategy::kOptimized;
  if (name == "optimistic") return Strategy::kOptimistic;
  if (name == "submax") return Strategy::kSubMax;
  if (name == "negative") return Strategy::kNegative;
  throw InvalidConfig("unknown marginalization strategy '" + name + "'");
}

}  // namespace gmb::gm
