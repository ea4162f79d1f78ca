#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gmb/baselines/baselines.hpp"
#include "gmb/envs/bernoulli.hpp"
#include "gmb/gm/marginalization.hpp"
#include "gmb/harness/export.hpp"
#include "gmb/rcp/counting.hpp"

namespace gmb::harness {

/// Inference policies built from uniformly logged data on a small
/// non-contextual bandit, with their true expected rewards.
struct Illustration {
  std::vector<double> arm_means;
  ProbabilityVector negative = ProbabilityVector::uniform(1);
  ProbabilityVector positive = ProbabilityVector::uniform(1);
  ProbabilityVector optimized = ProbabilityVector::uniform(1);
  ProbabilityVector optimistic = ProbabilityVector::uniform(1);
  ProbabilityVector submax = ProbabilityVector::uniform(1);
  double lambda = 1.0;
  std::map<std::string, double> expected_reward;
};

struct IllustrationSetup {
  std::size_t arms = 10;
  double alpha = 1.0;
  double beta = 9.0;
  std::size_t observations = 1000;
  double smoothing = 0.0;
};

inline Illustration illustrate(std::uint64_t seed, const IllustrationSetup& setup = {}) {
  const Rng root(seed);
  const envs::BernoulliBetaEnv env(setup.arms, setup.alpha, setup.beta, root.split(1).seed());
  Rng act_rng = root.split(2);
  Rng reward_rng = root.split(3);
  std::vector<Observation> data;
  data.reserve(setup.observations);
  const double propensity = 1.0 / static_cast<double>(setup.arms);
  for (std::size_t i = 0; i < setup.observations; ++i) {
    const ActionId a = baselines::random_act(setup.arms, act_rng);
    data.push_back({Context{}, a, env.pull(a, {}, reward_rng), propensity});
  }
  rcp::CountingRcp model(setup.arms, setup.smoothing);
  model.update(data);

  Illustration out;
  out.arm_means = env.arm_means();
  // With raw frequencies a condition may have no data; fall back to uniform.
  auto conditional = [&](double r) {
    try {
      return model.policy(r);
    } catch (const DegenerateNormalization&) {
      return ProbabilityVector::uniform(setup.arms);
    }
  };
  out.negative = conditional(0.0);
  out.positive = conditional(1.0);
  const gm::OptimizedPolicy opt = gm::optimized_policy(
      out.negative, out.positive, std::span<const Observation>(data),
      [&](const Observation& o) { return out.negative[action_index(o.action)]; },
      [&](const Observation& o) { return out.positive[action_index(o.action)]; });
  out.optimized = opt.policy;
  out.lambda = opt.lambda;
  out.optimistic = gm::optimistic_policy(out.positive);
  out.submax = gm::submax_policy(out.negative, out.positive);

  const std::span<const double> means(out.arm_means);
  out.expected_reward["random"] = ProbabilityVector::uniform(setup.arms).expectation(means);
  out.expected_reward["negative"] = out.negative.expectation(means);
  out.expected_reward["positive"] = out.positive.expectation(means);
  out.expected_reward["optimized"] = out.optimized.expectation(means);
  out.expected_reward["optimistic"] = out.optimistic.expectation(means);
  out.expected_reward["submax"] = out.submax.expectation(means);
  return out;
}

/// Writes policy_<strategy>.csv (action,probability,true_value) per policy
/// and summary.csv (policy,expected_reward).
inline void export_illustration(const Illustration& ill, const std::filesystem::path& dir) {
  const std::vector<std::pair<std::string, const ProbabilityVector*>> policies = {
      {"negative", &ill.negative}, {"positive", &ill.positive},     {"optimized", &ill.optimized},
      {"optimistic", &ill.optimistic}, {"submax", &ill.submax}};
  for (const auto& [name, pv] : policies) {
    std::ostringstream os;
    os << "action,probability,true_value\n";
    for (std::size_t a = 0; a < pv->size(); ++a) {
      os << a << ',' << format_double((*pv)[a]) << ',' << format_double(ill.arm_means[a]) << '\n';
    }
    write_file(dir / ("policy_" + name + ".csv"), os.str());
  }
  std::ostringstream summary;
  summary << "policy,expected_reward\n";
  for (const auto& [name, value] : ill.expected_reward) summary << name << ',' << format_double(value) << '\n';
  summary << "optimized_lambda," << format_double(ill.lambda) << '\n';
  write_file(dir / "summary.csv", summary.str());
}

}  // namespace gmb::harness
