#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/random.hpp"

namespace gmb {

/// Entries of a probability vector must sum to one within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-9;

/// A finite categorical distribution over actions.
///
/// Construction validates nonnegativity and sum-to-one; a constructed
/// ProbabilityVector is always valid.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidProbability("empty probability vector");
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidProbability("entry " + std::to_string(p) + " is negative or not finite");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw InvalidProbability("entries sum to " + std::to_string(total));
    }
  }

  static ProbabilityVector uniform(std::size_t k) {
    return ProbabilityVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  /// Point mass on `index`.
  static ProbabilityVector point(std::size_t k, std::size_t index) {
    std::vector<double> p(k, 0.0);
    p.at(index) = 1.0;
    return ProbabilityVector(std::move(p));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const noexcept { return probs_; }
  const std::vector<double>& vector() const noexcept { return probs_; }

  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

  /// Expectation of `values` under this distribution.
  double expectation(std::span<const double> values) const {
    if (values.size() != probs_.size()) throw InvalidInput("expectation length mismatch");
    return std::inner_product(probs_.begin(), probs_.end(), values.begin(), 0.0);
  }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::vector<double> probs_;
};

/// Scales nonnegative weights to sum to one.
///
/// Throws DegenerateNormalization on negative entries or a zero total; the
/// caller decides the fallback.
inline ProbabilityVector normalize(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DegenerateNormalization("weight " + std::to_string(w) + " is negative or not finite");
    }
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateNormalization("weights sum to zero");
  std::vector<double> out(weights.begin(), weights.end());
  // Already normalized up to summation rounding: returning the input keeps
  // normalize idempotent bit for bit.
  const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(weights.size());
  if (std::abs(total - 1.0) <= rounding) return ProbabilityVector(std::move(out));
  for (double& w : out) w /= total;
  return ProbabilityVector(std::move(out));
}

inline ProbabilityVector normalize(const std::vector<double>& weights) {
  return normalize(std::span<const double>(weights));
}

/// Draws an index i with probability pv[i].
inline std::size_t sample(const ProbabilityVector& pv, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pv[i] <= 0.0) continue;
    cumulative += pv[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the accumulated total.
  return last_positive;
}

/// Lowest index among the maximal entries.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace gmb
