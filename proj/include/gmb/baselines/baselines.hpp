#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/random.hpp"
#include "gmb/core/types.hpp"
#include "gmb/neural/value_model.hpp"

namespace gmb::baselines {

/// Per-arm pull and success counts.
class ArmStats {
 public:
  explicit ArmStats(std::size_t arms) : pulls_(arms, 0), successes_(arms, 0) {
    if (arms == 0) throw InvalidConfig("need at least one arm");
  }

  ArmStats(std::vector<long> pulls, std::vector<long> successes) : pulls_(std::move(pulls)), successes_(std::move(successes)) {
    if (pulls_.empty() || pulls_.size() != successes_.size()) throw InvalidInput("pull/success counts mismatch");
    for (std::size_t i = 0; i < pulls_.size(); ++i) {
      if (pulls_[i] < 0 || successes_[i] < 0 || successes_[i] > pulls_[i]) throw InvalidInput("invalid arm counts");
      total_ += pulls_[i];
    }
  }

  std::size_t arms() const noexcept { return pulls_.size(); }
  long total() const noexcept { return total_; }
  long pulls(std::size_t i) const { return pulls_.at(i); }
  long successes(std::size_t i) const { return successes_.at(i); }

  void record(std::size_t arm, double reward) {
    if (arm >= arms()) throw InvalidAction("arm out of range");
    ++pulls_[arm];
    ++total_;
    if (reward > 0.0) ++successes_[arm];
  }

  void update(std::span<const Observation> batch) {
    for (const Observation& obs : batch) record(action_index(obs.action), obs.reward.value);
  }

  /// Lowest-index arm never pulled, if any.
  std::optional<std::size_t> first_unpulled() const {
    for (std::size_t i = 0; i < pulls_.size(); ++i) {
      if (pulls_[i] == 0) return i;
    }
    return std::nullopt;
  }

  double mean(std::size_t i) const { return static_cast<double>(successes_[i]) / static_cast<double>(pulls_[i]); }

 private:
  std::vector<long> pulls_;
  std::vector<long> successes_;
  long total_ = 0;
};

inline ActionId random_act(std::size_t arms, Rng& rng) {
  if (arms == 0) throw InvalidConfig("need at least one arm");
  return ActionId{rng.uniform_index(arms)};
}

/// Greedy arm: the lowest unpulled arm if any, else the best empirical mean
/// (ties to the lowest index).
inline std::size_t greedy_arm(const ArmStats& stats) {
  if (auto unpulled = stats.first_unpulled()) return *unpulled;
  std::size_t best = 0;
  for (std::size_t i = 1; i < stats.arms(); ++i) {
    if (stats.mean(i) > stats.mean(best)) best = i;
  }
  return best;
}

/// Probability that epsilon-greedy plays `arm`.
inline double epsilon_greedy_probability(std::size_t greedy, std::size_t arms, double epsilon, std::size_t arm) {
  return (arm == greedy ? 1.0 - epsilon : 0.0) + epsilon / static_cast<double>(arms);
}

inline ActionId epsilon_greedy_act(const ArmStats& stats, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidConfig("epsilon must lie in [0, 1]");
  // Always draw the coin so the random stream does not depend on epsilon.
  const bool explore = rng.uniform() < epsilon;
  if (explore) return random_act(stats.arms(), rng);
  return ActionId{greedy_arm(stats)};
}

/// UCB1 index: mean + sqrt(2 ln t / n). Unpulled arms are played first.
inline double ucb1_index(const ArmStats& stats, std::size_t i) {
  return stats.mean(i) +
         std::sqrt(2.0 * std::log(static_cast<double>(stats.total())) / static_cast<double>(stats.pulls(i)));
}

inline ActionId ucb1_act(const ArmStats& stats) {
  if (auto unpulled = stats.first_unpulled()) return ActionId{*unpulled};
  std::size_t best = 0;
  double best_index = ucb1_index(stats, 0);
  for (std::size_t i = 1; i < stats.arms(); ++i) {
    const double index = ucb1_index(stats, i);
    if (index > best_index) {
      best = i;
      best_index = index;
    }
  }
  return ActionId{best};
}

/// Independent Beta posteriors over Bernoulli arm means.
class BetaPosterior {
 public:
  BetaPosterior(std::size_t arms, double prior_a, double prior_b)
      : prior_a_(prior_a), prior_b_(prior_b), a_(arms, prior_a), b_(arms, prior_b) {
    if (arms == 0) throw InvalidConfig("need at least one arm");
    if (!(prior_a > 0.0) || !(prior_b > 0.0)) throw InvalidConfig("Beta prior parameters must be positive");
  }

  BetaPosterior(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty() || a_.size() != b_.size()) throw InvalidInput("posterior parameter lengths differ");
    prior_a_ = a_.front();
    prior_b_ = b_.front();
  }

  std::size_t arms() const noexcept { return a_.size(); }
  double prior_a() const noexcept { return prior_a_; }
  double prior_b() const noexcept { return prior_b_; }
  double a(std::size_t i) const { return a_.at(i); }
  double b(std::size_t i) const { return b_.at(i); }
  double mean(std::size_t i) const { return a_.at(i) / (a_.at(i) + b_.at(i)); }

  void record(std::size_t arm, double reward) {
    if (arm >= arms()) throw InvalidAction("arm out of range");
    if (reward > 0.0) {
      a_[arm] += 1.0;
    } else {
      b_[arm] += 1.0;
    }
  }

 private:
  double prior_a_;
  double prior_b_;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Conjugate update with every observation in `batch`.
inline BetaPosterior ts_beta_update(BetaPosterior posterior, std::span<const Observation> batch) {
  for (const Observation& obs : batch) posterior.record(action_index(obs.action), obs.reward.value);
  return posterior;
}

/// One posterior draw per arm; plays the argmax.
inline ActionId ts_beta_act(const BetaPosterior& posterior, Rng& rng) {
  std::vector<double> draws(posterior.arms());
  for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = rng.beta(posterior.a(i), posterior.b(i));
  return ActionId{argmax(draws)};
}

/// Monte Carlo dropout Thompson sampling: one dropout-enabled forward pass
/// per arm, then argmax. Without a fitted model it acts uniformly at random.
inline ActionId neural_ts_act(const neural::ValueModel* model, std::size_t arms, const Context& context, Rng& rng) {
  if (model == nullptr) return random_act(arms, rng);
  const std::vector<double> sampled = model->predict_all(context.values, neural::DropoutMode::kSample, rng);
  return ActionId{argmax(sampled)};
}

}  // namespace gmb::baselines
