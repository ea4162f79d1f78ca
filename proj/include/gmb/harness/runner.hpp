#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "gmb/envs/bernoulli.hpp"
#include "gmb/envs/delay_buffer.hpp"
#include "gmb/envs/neural_env.hpp"
#include "gmb/harness/config.hpp"
#include "gmb/harness/policies.hpp"
#include "gmb/rcp/condition_rewards.hpp"

namespace gmb::harness {

/// Per-step values of one repetition and their prefix sums. `regret` is
/// false when rewards were recorded instead (combinatorial environments).
struct RunTrace {
  std::vector<double> per_step;
  std::vector<double> accumulated;
  std::uint64_t seed = 0;
  bool regret = true;
};

/// Per-step mean and 2.5% / 97.5% envelope across repetitions.
struct AggregateSeries {
  std::string label;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t steps() const noexcept { return mean.size(); }
};

/// Seed of repetition `rep`: base XOR rep.
inline std::uint64_t repetition_seed(std::uint64_t base, std::size_t rep) { return base ^ static_cast<std::uint64_t>(rep); }

/// Independent random streams of one repetition. Streams do not depend on
/// the policy, so all policies of a repetition face the same environment,
/// contexts, and reward noise.
struct RepetitionStreams {
  explicit RepetitionStreams(std::uint64_t seed)
      : env_seed(Rng(seed).split(1).seed()), context(Rng(seed).split(2)), reward(Rng(seed).split(3)),
        policy(Rng(seed).split(4)) {}

  std::uint64_t env_seed;
  Rng context;
  Rng reward;
  Rng policy;
};

inline std::unique_ptr<envs::Environment> make_environment(const EnvSpec& spec, std::uint64_t seed) {
  switch (spec.family) {
    case EnvFamily::kBernoulli:
      return std::make_unique<envs::BernoulliBetaEnv>(spec.arms, spec.alpha, spec.beta, seed);
    case EnvFamily::kContextual:
      return std::make_unique<envs::ContextualNeuralEnv>(spec.arms, spec.context_dim, spec.shift, seed);
    case EnvFamily::kCombinatorial:
      return std::make_unique<envs::CombinatorialEnv>(spec.slots, spec.context_dim, spec.shift, seed);
  }
  throw InvalidConfig("unknown environment family");
}

/// Optional per-step hook: (step, observation, released batch size).
using StepObserver = std::function<void(long, const Observation&, std::size_t)>;

/// The act / reward / delay / update loop. Records expected regret when the
/// environment provides an optimal value, realized reward otherwise.
inline RunTrace simulate(const envs::Environment& env, Policy& policy, long horizon, std::size_t buffer_capacity,
                         RepetitionStreams& streams, const StepObserver& observer = {}) {
  RunTrace trace;
  const bool regret_mode = env.has_optimal_value();
  trace.regret = regret_mode;
  trace.per_step.reserve(static_cast<std::size_t>(horizon));
  trace.accumulated.reserve(static_cast<std::size_t>(horizon));
  envs::DelayBuffer<Observation> buffer(buffer_capacity);
  double total = 0.0;
  for (long t = 0; t < horizon; ++t) {
    Context context = env.contextual() ? env.sample_context(streams.context) : Context{};
    const Decision d = policy.act(context, streams.policy);
    const Reward reward = env.pull(d.action, context, streams.reward);
    const double value = regret_mode ? env.optimal_value(context) - env.mean_reward(d.action, context) : reward.value;
    total += value;
    trace.per_step.push_back(value);
    trace.accumulated.push_back(total);

    Observation obs{std::move(context), d.action, reward, d.propensity};
    obs.validate();
    buffer.push(obs);
    const std::vector<Observation> released = buffer.poll();
    // A release on the last step would train a model that never acts.
    if (!released.empty() && t + 1 < horizon) policy.observe(released);
    if (observer) observer(t, obs, released.size());
  }
  return trace;
}

inline RunTrace run_repetition(const ExperimentConfig& config, const PolicySpec& spec, std::size_t rep_index,
                               const StepObserver& observer = {}) {
  const std::uint64_t seed = repetition_seed(config.seed, rep_index);
  RepetitionStreams streams(seed);
  const auto env = make_environment(config.env, streams.env_seed);
  const auto policy = make_policy(spec, *env, config, Rng(seed).split(5).seed());
  RunTrace trace = simulate(*env, *policy, config.horizon, config.env.buffer, streams, observer);
  trace.seed = seed;
  return trace;
}

/// Mean and empirical 2.5% / 97.5% quantiles per step. The envelope is
/// widened where needed so that lo <= mean <= hi holds at every step.
inline AggregateSeries aggregate(const std::vector<RunTrace>& traces, std::string label = {}) {
  if (traces.empty()) throw NoData("no traces to aggregate");
  const std::size_t steps = traces.front().accumulated.size();
  AggregateSeries out;
  out.label = std::move(label);
  out.mean.resize(steps);
  out.lo.resize(steps);
  out.hi.resize(steps);
  std::vector<double> column(traces.size());
  for (std::size_t t = 0; t < steps; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      if (traces[r].accumulated.size() != steps) throw InvalidInput("traces have different lengths");
      column[r] = traces[r].accumulated[t];
      sum += column[r];
    }
    std::sort(column.begin(), column.end());
    const double mean = sum / static_cast<double>(traces.size());
    out.mean[t] = mean;
    out.lo[t] = std::min(rcp::quantile_sorted(column, 2.5), mean);
    out.hi[t] = std::max(rcp::quantile_sorted(column, 97.5), mean);
  }
  return out;
}

/// Runs `count` jobs on up to `workers` threads. Job i writes only slot i of
/// its output, so results do not depend on the worker count.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Traces of every repetition of one policy.
inline std::vector<RunTrace> run_repetitions(const ExperimentConfig& config, const PolicySpec& spec,
                                             std::size_t workers = 1) {
  std::vector<RunTrace> traces(config.repetitions);
  parallel_for(config.repetitions, workers, [&](std::size_t rep) { traces[rep] = run_repetition(config, spec, rep); });
  return traces;
}

/// All policies of one experiment.
struct ExperimentResult {
  ExperimentConfig config;
  std::vector<AggregateSeries> series;
  std::vector<std::vector<RunTrace>> traces;
  bool regret = true;
};

inline ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers = 1) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  for (const PolicySpec& spec : config.policies) {
    auto traces = run_repetitions(config, spec, workers);
    result.regret = traces.front().regret;
    result.series.push_back(aggregate(traces, spec.label));
    result.traces.push_back(std::move(traces));
  }
  return result;
}

/// Runs every config; `repetitions` overrides each config's count when > 0.
inline std::vector<ExperimentResult> run_sweep(std::vector<ExperimentConfig> configs, std::size_t repetitions = 0,
                                               std::size_t workers = 1) {
  std::vector<ExperimentResult> results;
  results.reserve(configs.size());
  for (ExperimentConfig& c : configs) {
    if (repetitions > 0) c.repetitions = repetitions;
    results.push_back(run_experiment(c, workers));
  }
  return results;
}

}  // namespace gmb::harness
