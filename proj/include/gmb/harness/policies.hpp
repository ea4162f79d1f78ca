#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmb/baselines/baselines.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/random.hpp"
#include "gmb/core/types.hpp"
#include "gmb/envs/environment.hpp"
#include "gmb/gm/marginalization.hpp"
#include "gmb/harness/config.hpp"
#include "gmb/neural/value_model.hpp"
#include "gmb/rcp/counting.hpp"
#include "gmb/rcp/cvae_rcp.hpp"

namespace gmb::harness {

/// An action together with the probability the policy assigned to it.
struct Decision {
  Action action;
  double propensity = 1.0;
};

/// A bandit policy driven by the simulation loop. `observe` is called only
/// with batches released by the delay buffer.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision act(const Context& context, Rng& rng) = 0;
  virtual void observe(std::span<const Observation> released) = 0;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(const envs::Environment& env) : env_(env) {}

  Decision act(const Context&, Rng& rng) override {
    const std::size_t n = env_.action_count();
    return {env_.make_action(rng.uniform_index(n)), 1.0 / static_cast<double>(n)};
  }
  void observe(std::span<const Observation>) override {}

 private:
  const envs::Environment& env_;
};

class EpsilonGreedyPolicy final : public Policy {
 public:
  EpsilonGreedyPolicy(std::size_t arms, double epsilon) : stats_(arms), epsilon_(epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidConfig("epsilon must lie in [0, 1]");
  }

  Decision act(const Context&, Rng& rng) override {
    const ActionId a = baselines::epsilon_greedy_act(stats_, epsilon_, rng);
    const double p =
        baselines::epsilon_greedy_probability(baselines::greedy_arm(stats_), stats_.arms(), epsilon_, a.index);
    return {a, p};
  }
  void observe(std::span<const Observation> released) override { stats_.update(released); }

 private:
  baselines::ArmStats stats_;
  double epsilon_;
};

class Ucb1Policy final : public Policy {
 public:
  explicit Ucb1Policy(std::size_t arms) : stats_(arms) {}

  Decision act(const Context&, Rng&) override { return {baselines::ucb1_act(stats_), 1.0}; }
  void observe(std::span<const Observation> released) override { stats_.update(released); }

 private:
  baselines::ArmStats stats_;
};

/// Beta-Bernoulli Thompson sampling. The recorded propensity is 1: the
/// action is deterministic given the posterior draw, and the marginal
/// argmax probability has no closed form.
class BetaTsPolicy final : public Policy {
 public:
  BetaTsPolicy(std::size_t arms, double prior_a, double prior_b) : posterior_(arms, prior_a, prior_b) {}

  Decision act(const Context&, Rng& rng) override { return {baselines::ts_beta_act(posterior_, rng), 1.0}; }
  void observe(std::span<const Observation> released) override {
    posterior_ = baselines::ts_beta_update(std::move(posterior_), released);
  }

 private:
  baselines::BetaPosterior posterior_;
};

/// Contextual value-model baselines refit from scratch on every release:
/// MC-dropout Thompson sampling, or epsilon-greedy on the dropout-free fit.
class NeuralValuePolicy final : public Policy {
 public:
  enum class Mode { kThompson, kEpsilonGreedy };

  NeuralValuePolicy(std::size_t arms, std::size_t context_dim, Mode mode, double epsilon, const ModelSettings& settings,
                    std::uint64_t seed)
      : arms_(arms), context_dim_(context_dim), mode_(mode), epsilon_(epsilon), settings_(settings), seed_(seed) {}

  Decision act(const Context& context, Rng& rng) override {
    if (!model_) return {ActionId{rng.uniform_index(arms_)}, 1.0 / static_cast<double>(arms_)};
    if (mode_ == Mode::kThompson) return {baselines::neural_ts_act(&*model_, arms_, context, rng), 1.0};
    const bool explore = rng.uniform() < epsilon_;
    const std::size_t greedy = argmax(model_->predict_all(context.values, neural::DropoutMode::kOff, rng));
    const std::size_t a = explore ? rng.uniform_index(arms_) : greedy;
    return {ActionId{a}, baselines::epsilon_greedy_probability(greedy, arms_, epsilon_, a)};
  }

  void observe(std::span<const Observation> released) override {
    for (const Observation& obs : released) history_.push_back(rcp::to_sample(obs));
    if (history_.empty()) return;
    neural::TrainConfig train = settings_.train;
    train.seed = Rng(seed_).split(releases_++).seed();
    const auto width = static_cast<Eigen::Index>(settings_.hidden_width);
    model_ = neural::fit_value_model(history_, {arms_}, context_dim_, train, {width, width});
  }

 private:
  std::size_t arms_;
  std::size_t context_dim_;
  Mode mode_;
  double epsilon_;
  ModelSettings settings_;
  std::uint64_t seed_;
  std::uint64_t releases_ = 0;
  std::vector<neural::Sample> history_;
  std::optional<neural::ValueModel> model_;
};

/// Applies a marginalization strategy to the (low, high) conditional pair.
inline ProbabilityVector inference_policy(gm::Strategy strategy, const ProbabilityVector& p0,
                                          const ProbabilityVector& p1, double coefficient) {
  switch (strategy) {
    case gm::Strategy::kOptimized: return gm::optimized_policy(p0, p1, coefficient).policy;
    case gm::Strategy::kOptimistic: return gm::optimistic_policy(p1);
    case gm::Strategy::kSubMax: return gm::submax_policy(p0, p1);
    case gm::Strategy::kNegative: return p0;
  }
  return p1;
}

/// Counting-backed reward-conditioned policy for non-contextual bandits.
/// The inference policy is rebuilt on each release and sampled between
/// releases; before the first release it acts uniformly.
class CountingRcpPolicy final : public Policy {
 public:
  CountingRcpPolicy(std::size_t arms, gm::Strategy strategy, double smoothing)
      : model_(arms, smoothing), strategy_(strategy), current_(ProbabilityVector::uniform(arms)) {}

  Decision act(const Context&, Rng& rng) override {
    const std::size_t a = sample(current_, rng);
    return {ActionId{a}, current_[a]};
  }

  void observe(std::span<const Observation> released) override {
    if (released.empty()) return;
    model_.update(released);
    history_.insert(history_.end(), released.begin(), released.end());
    const ProbabilityVector p0 = model_.low_policy();
    const ProbabilityVector p1 = model_.high_policy();
    double coefficient = 0.0;
    if (strategy_ == gm::Strategy::kOptimized) {
      coefficient = gm::is_coefficient(
          history_, [&](const Observation& o) { return p0[action_index(o.action)]; },
          [&](const Observation& o) { return p1[action_index(o.action)]; });
    }
    current_ = inference_policy(strategy_, p0, p1, coefficient);
  }

  const ProbabilityVector& current() const noexcept { return current_; }

 private:
  rcp::CountingRcp model_;
  gm::Strategy strategy_;
  ProbabilityVector current_;
  std::vector<Observation> history_;
};

/// CVAE-backed reward-conditioned policy for contextual and combinatorial
/// bandits. The inference policy is built per context over the joint action
/// space; the optimized strategy fits its slope once per release.
class CvaeRcpPolicy final : public Policy {
 public:
  CvaeRcpPolicy(const envs::Environment& env, gm::Strategy strategy, const ModelSettings& settings, std::uint64_t seed)
      : env_(env), strategy_(strategy), seed_(seed), model_(make_shape(env, settings), settings.train,
                                                             settings.latent_samples) {}

  Decision act(const Context& context, Rng& rng) override {
    const std::size_t n = env_.action_count();
    if (!model_.trained()) return {env_.make_action(rng.uniform_index(n)), 1.0 / static_cast<double>(n)};
    auto [low, high] = model_.policies(context, rng);
    const ProbabilityVector pv = inference_policy(strategy_, low.joint(), high.joint(), coefficient_);
    const std::size_t a = sample(pv, rng);
    return {env_.make_action(a), pv[a]};
  }

  void observe(std::span<const Observation> released) override {
    if (released.empty()) return;
    model_.append(released);
    history_.insert(history_.end(), released.begin(), released.end());
    // Fresh seed per release so each retrain is reproducible on its own.
    retrain_with_seed(Rng(seed_).split(releases_++).seed());
  }

  const rcp::CvaeRcp& model() const noexcept { return model_; }

 private:
  static neural::CvaeShape make_shape(const envs::Environment& env, const ModelSettings& settings) {
    neural::CvaeShape shape;
    shape.slot_sizes = env.layout().sizes();
    shape.context_dim = env.context_dim();
    shape.hidden_width = settings.hidden_width;
    shape.latent_dim = settings.latent_dim;
    shape.injection = settings.injection;
    return shape;
  }

  void retrain_with_seed(std::uint64_t seed) {
    model_.set_seed(seed);
    model_.retrain();
    if (strategy_ == gm::Strategy::kOptimized) {
      Rng latent_rng = Rng(seed).split(0x15);
      auto pi = [&](const Observation& o, double r) {
        const neural::Sample s = rcp::to_sample(o);
        return model_.policy(o.context, r, latent_rng).probability(s.choices);
      };
      coefficient_ = gm::is_coefficient(
          history_, [&](const Observation& o) { return pi(o, model_.conditions().low); },
          [&](const Observation& o) { return pi(o, model_.conditions().high); });
    }
  }

  const envs::Environment& env_;
  gm::Strategy strategy_;
  std::uint64_t seed_;
  std::uint64_t releases_ = 0;
  rcp::CvaeRcp model_;
  std::vector<Observation> history_;
  double coefficient_ = 0.0;
};

inline gm::Strategy strategy_of(const PolicySpec& spec) {
  return gm::parse_strategy(spec.kind.substr(std::string("rcp-").size()));
}

/// Builds the policy described by `spec` for `env`.
inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const envs::Environment& env,
                                           const ExperimentConfig& config, std::uint64_t seed) {
  const std::size_t n = env.action_count();
  const ModelSettings& settings = config.model;
  if (spec.kind == "random") return std::make_unique<RandomPolicy>(env);
  if (spec.kind == "egreedy") {
    const double eps = spec.argument.empty() ? 0.1 : parse_double(spec.label, spec.argument);
    if (env.contextual()) {
      return std::make_unique<NeuralValuePolicy>(n, env.context_dim(), NeuralValuePolicy::Mode::kEpsilonGreedy, eps,
                                                 settings, seed);
    }
    return std::make_unique<EpsilonGreedyPolicy>(n, eps);
  }
  if (spec.kind == "ucb1") return std::make_unique<Ucb1Policy>(n);
  if (spec.kind == "ts") {
    double a = 1.0;
    double b = 1.0;
    if (spec.argument == "env") {
      a = config.env.alpha;
      b = config.env.beta;
    } else if (!spec.argument.empty()) {
      std::tie(a, b) = parse_pair(spec.label, spec.argument);
    }
    return std::make_unique<BetaTsPolicy>(n, a, b);
  }
  if (spec.kind == "neural-ts") {
    return std::make_unique<NeuralValuePolicy>(n, env.context_dim(), NeuralValuePolicy::Mode::kThompson, 0.0,
                                               settings, seed);
  }
  if (spec.kind.rfind("rcp-", 0) == 0) {
    if (!env.contextual()) return std::make_unique<CountingRcpPolicy>(n, strategy_of(spec), settings.smoothing);
    return std::make_unique<CvaeRcpPolicy>(env, strategy_of(spec), settings, seed);
  }
  throw InvalidConfig("unknown policy '" + spec.label + "'");
}

}  // namespace gmb::harness
