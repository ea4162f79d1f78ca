#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gmb/envs/bernoulli.hpp"
#include "gmb/envs/delay_buffer.hpp"
#include "gmb/envs/neural_env.hpp"

namespace gmb::envs {
namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

TEST(BernoulliEnv, PriorMeanOverSeeds) {
  double beta19 = 0.0;
  double beta11 = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    beta19 += mean_of(make_bernoulli_env(10, 1, 9, s).arm_means());
    beta11 += mean_of(make_bernoulli_env(10, 1, 1, 1000 + s).arm_means());
  }
  EXPECT_NEAR(beta19 / 200, 0.1, 0.01);
  EXPECT_NEAR(beta11 / 200, 0.5, 0.02);
}

TEST(BernoulliEnv, SameSeedSameMeans) {
  EXPECT_EQ(make_bernoulli_env(10, 1, 9, 3).arm_means(), make_bernoulli_env(10, 1, 9, 3).arm_means());
  EXPECT_NE(make_bernoulli_env(10, 1, 9, 3).arm_means(), make_bernoulli_env(10, 1, 9, 4).arm_means());
}

TEST(BernoulliEnv, RejectsBadConfig) {
  EXPECT_THROW(make_bernoulli_env(10, 0, 9, 1), InvalidConfig);
  EXPECT_THROW(make_bernoulli_env(10, 1, -1, 1), InvalidConfig);
  EXPECT_THROW(make_bernoulli_env(0, 1, 1, 1), InvalidConfig);
}

TEST(BernoulliEnv, PullFrequencies) {
  const BernoulliBetaEnv env({0.0, 1.0, 0.3});
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(env.pull(ActionId{0}, {}, rng).value, 0.0);
    EXPECT_EQ(env.pull(ActionId{1}, {}, rng).value, 1.0);
  }
  double hits = 0;
  for (int i = 0; i < 100000; ++i) hits += env.pull(ActionId{2}, {}, rng).value;
  EXPECT_NEAR(hits / 100000, 0.3, 0.01);
  EXPECT_THROW(env.pull(ActionId{3}, {}, rng), InvalidAction);
}

TEST(BernoulliEnv, OptimalValueIsMaxMean) {
  EXPECT_DOUBLE_EQ(BernoulliBetaEnv({0.1, 0.4, 0.2}).optimal_value({}), 0.4);
}

TEST(BernoulliEnv, RandomPolicyRewardConvergesToMeanOfArms) {
  const BernoulliBetaEnv env = make_bernoulli_env(10, 1, 1, 21);
  const double analytic = mean_of(env.arm_means());
  Rng rng(4);
  constexpr int kPulls = 200000;
  double total = 0;
  for (int i = 0; i < kPulls; ++i) total += env.pull(ActionId{rng.uniform_index(10)}, {}, rng).value;
  const double se = std::sqrt(analytic * (1 - analytic) / kPulls);
  EXPECT_NEAR(total / kPulls, analytic, 3 * se);
}

TEST(SampleContext, UnitNormAndCentered) {
  const ContextualNeuralEnv env(4, 20, 0.0, 1);
  Rng rng(2);
  std::vector<double> sums(20, 0.0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const Context c = env.sample_context(rng);
    ASSERT_EQ(c.dim(), 20u);
    ASSERT_NEAR(c.norm(), 1.0, 1e-9);
    for (std::size_t k = 0; k < 20; ++k) sums[k] += c.values[k];
  }
  for (double s : sums) EXPECT_NEAR(s / kDraws, 0.0, 0.02);
}

TEST(ContextualEnv, OptimalValueMatchesBruteForce) {
  const ContextualNeuralEnv env(4, 20, -2.0, 8);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Context c = env.sample_context(rng);
    double best = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      const double v = env.mean_reward(ActionId{a}, c);
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      best = std::max(best, v);
    }
    EXPECT_DOUBLE_EQ(env.optimal_value(c), best);
  }
}

TEST(ContextualEnv, DeterministicGivenSeed) {
  const ContextualNeuralEnv a(4, 20, 0.0, 5);
  const ContextualNeuralEnv b(4, 20, 0.0, 5);
  Rng rng(1);
  const Context c = a.sample_context(rng);
  EXPECT_EQ(a.arm_values(c), b.arm_values(c));
}

TEST(ContextualEnv, RejectsWrongContextAndAction) {
  const ContextualNeuralEnv env(4, 20, 0.0, 5);
  Context short_ctx{std::vector<double>(3, 0.0)};
  EXPECT_THROW(env.mean_reward(ActionId{0}, short_ctx), InvalidInput);
  Rng rng(1);
  EXPECT_THROW(env.mean_reward(ActionId{4}, env.sample_context(rng)), InvalidAction);
}

// Population mean of expected reward over contexts and arms tracks sigmoid(shift).
TEST(ContextualEnv, PopulationMeanTracksShift) {
  const std::vector<std::pair<double, double>> cases = {{0.0, 0.06}, {-2.0, 0.05}, {-4.0, 0.02}};
  const std::vector<double> reported = {0.501, 0.123, 0.0185};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    double total = 0.0;
    constexpr int kEnvs = 20;
    for (int e = 0; e < kEnvs; ++e) {
      const ContextualNeuralEnv env(4, 20, cases[k].first, 100 + static_cast<std::uint64_t>(e));
      Rng rng(static_cast<std::uint64_t>(e));
      double env_total = 0.0;
      for (int i = 0; i < 200; ++i) env_total += mean_of(env.arm_values(env.sample_context(rng)));
      total += env_total / 200;
    }
    EXPECT_NEAR(total / kEnvs, reported[k], cases[k].second) << "shift " << cases[k].first;
  }
}

TEST(CombinatorialEnv, LayoutAndUnsupportedOptimum) {
  const CombinatorialEnv env(CombinatorialEnv::kDefaultSlots, 20, -3.0, 1);
  EXPECT_EQ(env.action_count(), 24576u);
  EXPECT_TRUE(env.combinatorial());
  EXPECT_FALSE(env.has_optimal_value());
  Rng rng(1);
  const Context c = env.sample_context(rng);
  EXPECT_THROW(env.optimal_value(c), Unsupported);
  const Action a = env.make_action(12345);
  EXPECT_EQ(env.flat_index(a), 12345u);
  const double v = env.mean_reward(a, c);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  EXPECT_THROW(env.mean_reward(CombinatorialAction{{0, 0, 0, 0, 32}}, c), InvalidAction);
  EXPECT_THROW(env.mean_reward(ActionId{0}, c), InvalidAction);
}

TEST(DelayBuffer, ReleasesWholeBatchAtThreshold) {
  DelayBuffer<int> buf(2);
  buf.push(1);
  EXPECT_TRUE(buf.poll().empty());
  buf.push(2);
  EXPECT_EQ(buf.poll(), (std::vector<int>{1, 2}));
  EXPECT_EQ(buf.pending(), 0u);
  EXPECT_TRUE(buf.poll().empty());
}

TEST(DelayBuffer, CapacityOneIsNoDelay) {
  DelayBuffer<int> buf(1);
  for (int i = 0; i < 5; ++i) {
    buf.push(i);
    EXPECT_EQ(buf.poll(), std::vector<int>{i});
  }
  EXPECT_THROW(DelayBuffer<int>(0), InvalidConfig);
}

TEST(DelayBuffer, ConservesAndOrders) {
  DelayBuffer<int> buf(7);
  std::vector<int> polled;
  for (int i = 0; i < 100; ++i) {
    buf.push(i);
    for (int v : buf.poll()) polled.push_back(v);
    ASSERT_EQ(static_cast<std::size_t>(i + 1), polled.size() + buf.pending());
  }
  for (std::size_t i = 0; i < polled.size(); ++i) EXPECT_EQ(polled[i], static_cast<int>(i));
}

}  // namespace
}  // namespace gmb::envs
