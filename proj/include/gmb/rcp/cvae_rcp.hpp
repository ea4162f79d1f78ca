#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/probability.hpp"
#include "gmb/core/random.hpp"
#include "gmb/core/types.hpp"
#include "gmb/neural/cvae.hpp"
#include "gmb/rcp/condition_rewards.hpp"

namespace gmb::rcp {

/// Monte Carlo estimate of a reward-conditioned policy: per latent sample,
/// one categorical per slot. The policy is the average over samples of the
/// product of slot categoricals.
class SlotMixture {
 public:
  SlotMixture(std::vector<std::size_t> slot_sizes, std::vector<neural::Matrix> per_slot)
      : slot_sizes_(std::move(slot_sizes)), per_slot_(std::move(per_slot)) {}

  std::size_t latent_samples() const { return static_cast<std::size_t>(per_slot_.front().cols()); }
  const std::vector<std::size_t>& slot_sizes() const noexcept { return slot_sizes_; }

  /// Per-slot marginal distributions.
  std::vector<ProbabilityVector> marginals() const {
    std::vector<ProbabilityVector> out;
    for (const neural::Matrix& m : per_slot_) {
      const neural::Matrix mean = m.rowwise().mean();
      out.push_back(normalize(std::vector<double>(mean.data(), mean.data() + mean.size())));
    }
    return out;
  }

  /// Probability of one action (choices per slot).
  double probability(std::span<const std::size_t> choices) const {
    double total = 0.0;
    for (Eigen::Index z = 0; z < per_slot_.front().cols(); ++z) {
      double p = 1.0;
      for (std::size_t s = 0; s < per_slot_.size(); ++s) p *= per_slot_[s](static_cast<Eigen::Index>(choices[s]), z);
      total += p;
    }
    return total / static_cast<double>(per_slot_.front().cols());
  }

  /// Distribution over flat actions (mixed radix, slot 0 most significant).
  ProbabilityVector joint() const {
    std::size_t card = 1;
    for (std::size_t s : slot_sizes_) card *= s;
    std::vector<double> out(card, 0.0);
    std::vector<double> current;
    std::vector<double> next;
    for (Eigen::Index z = 0; z < per_slot_.front().cols(); ++z) {
      current.assign(1, 1.0);
      for (std::size_t s = 0; s < per_slot_.size(); ++s) {
        const std::size_t n = slot_sizes_[s];
        next.resize(current.size() * n);
        for (std::size_t i = 0; i < current.size(); ++i) {
          for (std::size_t c = 0; c < n; ++c) next[i * n + c] = current[i] * per_slot_[s](static_cast<Eigen::Index>(c), z);
        }
        current.swap(next);
      }
      for (std::size_t i = 0; i < card; ++i) out[i] += current[i];
    }
    return normalize(out);
  }

 private:
  std::vector<std::size_t> slot_sizes_;
  std::vector<neural::Matrix> per_slot_;
};

/// Converts an observation to a training sample.
inline neural::Sample to_sample(const Observation& obs) {
  neural::Sample s;
  if (const auto* id = std::get_if<ActionId>(&obs.action)) {
    s.choices = {id->index};
  } else {
    s.choices = std::get<CombinatorialAction>(obs.action).choices;
  }
  s.context = obs.context.values;
  s.reward = obs.reward.value;
  return s;
}

/// Reward-conditioned policy backed by a CVAE, retrained from scratch on the
/// full replay history whenever new data arrives.
class CvaeRcp {
 public:
  CvaeRcp(neural::CvaeShape shape, neural::TrainConfig train, std::size_t latent_samples = 5,
          ConditionRewards conditions = {})
      : shape_(std::move(shape)), train_(train), latent_samples_(latent_samples), conditions_(conditions) {
    if (latent_samples_ == 0) throw InvalidConfig("latent sample count must be >= 1");
    train_.validate();
  }

  bool trained() const noexcept { return model_.has_value(); }
  const ConditionRewards& conditions() const noexcept { return conditions_; }
  std::size_t latent_samples() const noexcept { return latent_samples_; }
  const neural::CvaeShape& shape() const noexcept { return shape_; }
  const std::vector<neural::Sample>& history() const noexcept { return history_; }
  const neural::Cvae& model() const {
    if (!model_) throw NotTrained("CVAE policy queried before training");
    return *model_;
  }
  const neural::TrainReport& last_report() const noexcept { return report_; }

  /// Seed for the next retrain (initialization and minibatch order).
  void set_seed(std::uint64_t seed) noexcept { train_.seed = seed; }

  /// Appends newly released observations to the replay history.
  void append(std::span<const Observation> batch) {
    for (const Observation& obs : batch) history_.push_back(to_sample(obs));
  }

  /// Fresh initialization, then training on the whole history.
  const neural::TrainReport& retrain() {
    if (history_.empty()) throw NoData("CVAE retrain needs at least one observation");
    neural::Cvae fresh(shape_, Rng(train_.seed).split(0xC7AE).seed());
    report_ = neural::fit_cvae(fresh, history_, train_);
    model_ = std::move(fresh);
    return report_;
  }

  const neural::TrainReport& retrain(std::span<const Observation> dataset) {
    history_.clear();
    append(dataset);
    return retrain();
  }

  /// Monte Carlo policy pi(a | c, r) from `latent_samples` prior draws.
  SlotMixture policy(const Context& context, double reward, Rng& rng) const {
    const neural::Matrix z = neural::Cvae::standard_normal(shape_.latent_dim, static_cast<Eigen::Index>(latent_samples_), rng);
    return policy_with_latents(context, reward, z);
  }

  /// The low- and high-condition policies evaluated on shared latent draws.
  std::pair<SlotMixture, SlotMixture> policies(const Context& context, Rng& rng) const {
    const neural::Matrix z = neural::Cvae::standard_normal(shape_.latent_dim, static_cast<Eigen::Index>(latent_samples_), rng);
    return {policy_with_latents(context, conditions_.low, z), policy_with_latents(context, conditions_.high, z)};
  }

  SlotMixture policy_with_latents(const Context& context, double reward, const neural::Matrix& z) const {
    const neural::Cvae& m = model();
    const auto n = z.cols();
    neural::Matrix contexts(static_cast<Eigen::Index>(shape_.context_dim), n);
    if (context.dim() != shape_.context_dim) throw ShapeError("context dimension mismatch");
    for (Eigen::Index j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < shape_.context_dim; ++i) contexts(static_cast<Eigen::Index>(i), j) = context.values[i];
    }
    const neural::Matrix rewards = neural::Matrix::Constant(1, n, reward);
    return SlotMixture(shape_.slot_sizes, m.decode(z, contexts, rewards));
  }

 private:
  neural::CvaeShape shape_;
  neural::TrainConfig train_;
  std::size_t latent_samples_;
  ConditionRewards conditions_;
  std::vector<neural::Sample> history_;
  std::optional<neural::Cvae> model_;
  neural::TrainReport report_;
};

}  // namespace gmb::rcp
