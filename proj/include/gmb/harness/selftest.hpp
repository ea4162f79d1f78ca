#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <string>
#include <vector>

#include "gmb/core/probability.hpp"
#include "gmb/envs/delay_buffer.hpp"
#include "gmb/gm/marginalization.hpp"
#include "gmb/harness/runner.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline ProbabilityVector random_simplex_point(std::size_t k, Rng& rng) {
  std::vector<double> w(k);
  for (double& x : w) x = rng.gamma(1.0);
  // Exact zeros exercise the zero-probability coordinates.
  if (rng.uniform() < 0.2) w[rng.uniform_index(k)] = 0.0;
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return normalize(w);
}

/// Feasible lambda interval found by scanning a grid, independent of the
/// closed-form bounds. Returns (lowest, highest) feasible grid point.
inline std::pair<double, double> scan_feasible_lambdas(const ProbabilityVector& p0, const ProbabilityVector& p1,
                                                       double from, double to, double step) {
  double lowest = std::numeric_limits<double>::infinity();
  double highest = -std::numeric_limits<double>::infinity();
  const long n = std::lround((to - from) / step);
  for (long i = 0; i <= n; ++i) {
    const double lambda = from + step * static_cast<double>(i);
    bool ok = true;
    for (std::size_t k = 0; k < p0.size() && ok; ++k) ok = (1.0 - lambda) * p0[k] + lambda * p1[k] >= 0.0;
    if (ok) {
      lowest = std::min(lowest, lambda);
      highest = std::max(highest, lambda);
    }
  }
  return {lowest, highest};
}

/// Quick invariant suite used by `gmb selftest`.
inline std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  std::vector<CheckResult> results;
  auto check = [&](const std::string& name, const std::function<std::string()>& body) {
    try {
      const std::string failure = body();
      results.push_back({name, failure.empty(), failure});
    } catch (const std::exception& e) {
      results.push_back({name, false, e.what()});
    }
  };
  Rng rng(seed);

  check("normalize is idempotent", [&] {
    for (int i = 0; i < 200; ++i) {
      std::vector<double> w(1 + rng.uniform_index(20));
      for (double& x : w) x = rng.uniform() * 10.0;
      w[0] += 1e-3;
      const ProbabilityVector once = normalize(w);
      if (normalize(once.vector()) != once) return std::string("normalize(normalize(w)) != normalize(w)");
    }
    return std::string();
  });

  check("lambda bounds match grid scan", [&] {
    constexpr double kStep = 1e-3;
    for (int i = 0; i < 100; ++i) {
      const std::size_t k = 2 + rng.uniform_index(9);
      const ProbabilityVector p0 = random_simplex_point(k, rng);
      const ProbabilityVector p1 = random_simplex_point(k, rng);
      const gm::LambdaBounds b = gm::lambda_bounds(p0, p1);
      if (!(b.lower <= 0.0 && b.upper >= 1.0)) return std::string("endpoints 0 and 1 not feasible");
      const double from = std::isfinite(b.lower) ? std::floor(b.lower) - 1.0 : -10.0;
      const double to = std::isfinite(b.upper) ? std::ceil(b.upper) + 1.0 : 10.0;
      const auto [lo, hi] = scan_feasible_lambdas(p0, p1, from, to, kStep);
      if (std::isfinite(b.lower) && std::abs(lo - b.lower) > kStep) return "lower bound " + std::to_string(b.lower);
      if (std::isfinite(b.upper) && std::abs(hi - b.upper) > kStep) return "upper bound " + std::to_string(b.upper);
    }
    return std::string();
  });

  check("importance-sampling estimate is linear and maximized at lambda*", [&] {
    for (int i = 0; i < 20; ++i) {
      const std::size_t k = 2 + rng.uniform_index(9);
      const ProbabilityVector p0 = random_simplex_point(k, rng);
      const ProbabilityVector p1 = random_simplex_point(k, rng);
      std::vector<Observation> data;
      for (int j = 0; j < 50; ++j) {
        data.push_back({{}, ActionId{rng.uniform_index(k)}, Reward::binary(rng.bernoulli(0.3)), 1.0 / k});
      }
      auto pi0 = [&](const Observation& o) { return p0[action_index(o.action)]; };
      auto pi1 = [&](const Observation& o) { return p1[action_index(o.action)]; };
      const double r0 = gm::is_estimate(std::span<const Observation>(data), pi0, pi1, 0.0);
      const double rh = gm::is_estimate(std::span<const Observation>(data), pi0, pi1, 0.5);
      const double r1 = gm::is_estimate(std::span<const Observation>(data), pi0, pi1, 1.0);
      if (std::abs(rh - 0.5 * (r0 + r1)) > 1e-9) return std::string("estimate is not collinear");
      const auto opt = gm::optimized_policy(p0, p1, std::span<const Observation>(data), pi0, pi1);
      const double best = gm::is_estimate(std::span<const Observation>(data), pi0, pi1, opt.lambda);
      if (best < r0 - 1e-12 || best < r1 - 1e-12) return std::string("optimized estimate below an endpoint");
    }
    return std::string();
  });

  check("submax excludes dominated actions", [&] {
    for (int i = 0; i < 200; ++i) {
      const std::size_t k = 2 + rng.uniform_index(9);
      const ProbabilityVector p0 = random_simplex_point(k, rng);
      const ProbabilityVector p1 = random_simplex_point(k, rng);
      const ProbabilityVector s = gm::submax_policy(p0, p1);
      if (p0 == p1) continue;
      for (std::size_t a = 0; a < k; ++a) {
        if (p1[a] <= p0[a] && s[a] != 0.0) return std::string("dominated action kept probability");
      }
    }
    return std::string();
  });

  check("Gaussian KL is nonnegative", [&] {
    neural::Matrix mu(4, 50);
    neural::Matrix sigma(4, 50);
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      mu(i) = 3.0 * rng.normal();
      sigma(i) = std::exp(2.0 * rng.normal());
    }
    if (neural::gaussian_kl(mu, sigma).minCoeff() < 0.0) return std::string("negative KL");
    return std::string();
  });

  check("delay buffer conserves observations", [&] {
    envs::DelayBuffer<int> buffer(7);
    int pushed = 0;
    std::vector<int> released;
    for (int i = 0; i < 100; ++i) {
      buffer.push(pushed++);
      for (int v : buffer.poll()) released.push_back(v);
    }
    if (released.size() + buffer.pending() != static_cast<std::size_t>(pushed)) return std::string("count mismatch");
    for (std::size_t i = 0; i < released.size(); ++i) {
      if (released[i] != static_cast<int>(i)) return std::string("order not preserved");
    }
    return std::string();
  });

  check("repetitions are deterministic", [&] {
    ExperimentConfig c;
    c.env.arms = 20;
    c.horizon = 500;
    c.seed = seed;
    c.policies = {parse_policy("rcp-submax")};
    const RunTrace a = run_repetition(c, c.policies.front(), 3);
    const RunTrace b = run_repetition(c, c.policies.front(), 3);
    if (a.accumulated != b.accumulated) return std::string("traces differ");
    return std::string();
  });

  return results;
}

}  // namespace gmb::harness
