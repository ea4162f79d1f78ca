#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gmb/envs/bernoulli.hpp"
#include "gmb/rcp/condition_rewards.hpp"
#include "gmb/rcp/counting.hpp"
#include "gmb/rcp/cvae_rcp.hpp"

namespace gmb::rcp {
namespace {

Observation obs(std::size_t arm, bool reward) { return {{}, ActionId{arm}, Reward::binary(reward), 1.0}; }

TEST(Counting, RawFrequencies) {
  CountingRcp model(2, 0.0);
  const std::vector<Observation> batch = {obs(0, true), obs(0, true), obs(1, true)};
  model.update(batch);
  EXPECT_DOUBLE_EQ(model.policy(1.0)[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(model.policy(1.0)[1], 1.0 / 3.0);
  EXPECT_THROW(model.policy(0.0), DegenerateNormalization);
}

TEST(Counting, AddOneSmoothing) {
  CountingRcp model(2, 1.0);
  const std::vector<Observation> batch = {obs(0, true), obs(0, true), obs(1, true)};
  model.update(batch);
  EXPECT_DOUBLE_EQ(model.policy(1.0)[0], 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(model.policy(1.0)[1], 2.0 / 5.0);
  EXPECT_EQ(model.low_policy(), ProbabilityVector::uniform(2));
}

TEST(Counting, FreshModelIsUniform) {
  EXPECT_EQ(CountingRcp(10).high_policy(), ProbabilityVector::uniform(10));
}

TEST(Counting, UnmatchedRewardThrows) {
  CountingRcp model(2);
  std::vector<Observation> batch = {obs(0, true)};
  batch[0].reward = {0.5, RewardDomain::kContinuous};
  EXPECT_THROW(model.update(batch), InvalidReward);
  EXPECT_THROW(model.policy(0.5), InvalidReward);
  EXPECT_THROW(CountingRcp(0), InvalidConfig);
}

TEST(Counting, ZeroSmoothingMatchesConditionalFrequencies) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    CountingRcp model(4, 0.0);
    std::vector<Observation> batch;
    std::vector<int> high(4, 0);
    int total_high = 0;
    for (int i = 0; i < 60; ++i) {
      const std::size_t a = rng.uniform_index(4);
      const bool r = rng.bernoulli(0.5);
      batch.push_back(obs(a, r));
      if (r) {
        ++high[a];
        ++total_high;
      }
    }
    model.update(batch);
    for (std::size_t a = 0; a < 4; ++a) {
      EXPECT_NEAR(model.high_policy()[a], static_cast<double>(high[a]) / total_high, 1e-15);
    }
  }
}

TEST(Counting, EquivariantUnderRelabeling) {
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  CountingRcp original(4);
  CountingRcp relabeled(4);
  Rng rng(4);
  std::vector<Observation> a;
  std::vector<Observation> b;
  for (int i = 0; i < 40; ++i) {
    const std::size_t arm = rng.uniform_index(4);
    const bool r = rng.bernoulli(0.4);
    a.push_back(obs(arm, r));
    b.push_back(obs(perm[arm], r));
  }
  original.update(a);
  relabeled.update(b);
  for (std::size_t arm = 0; arm < 4; ++arm) {
    EXPECT_DOUBLE_EQ(original.high_policy()[arm], relabeled.high_policy()[perm[arm]]);
    EXPECT_DOUBLE_EQ(original.low_policy()[arm], relabeled.low_policy()[perm[arm]]);
  }
}

TEST(Counting, PositivePolicyFavorsTheBestArm) {
  const envs::BernoulliBetaEnv env = envs::make_bernoulli_env(10, 1, 9, 17);
  const auto& means = env.arm_means();
  const std::size_t best = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
  Rng rng(5);
  CountingRcp model(10, 0.0);
  std::vector<Observation> batch;
  for (int i = 0; i < 1000; ++i) {
    const Action a = ActionId{rng.uniform_index(10)};
    batch.push_back({{}, a, env.pull(a, {}, rng), 0.1});
  }
  model.update(batch);
  EXPECT_GT(model.high_policy()[best], 0.1);
}

TEST(ConditionRewards, Domains) {
  const ConditionRewards binary = select_condition_rewards({}, RewardDomain::kBinary);
  EXPECT_EQ(binary.low, 0.0);
  EXPECT_EQ(binary.high, 1.0);

  std::vector<double> values(100);
  for (int i = 0; i < 100; ++i) values[static_cast<std::size_t>(i)] = i + 1;
  const ConditionRewards continuous = select_condition_rewards(values, RewardDomain::kContinuous, 10, 90);
  EXPECT_NEAR(continuous.low, 10.9, 1e-12);
  EXPECT_NEAR(continuous.high, 90.1, 1e-12);

  const std::vector<double> domain = {0, 5, 10};
  const ConditionRewards finite = select_condition_rewards({}, RewardDomain::kDiscreteFinite, 10, 90, domain);
  EXPECT_EQ(finite.low, 0.0);
  EXPECT_EQ(finite.high, 10.0);

  const ConditionRewards unbounded = select_condition_rewards(values, RewardDomain::kDiscreteUnbounded, 10, 90);
  EXPECT_EQ(unbounded.low, 11.0);
  EXPECT_EQ(unbounded.high, 90.0);
}

TEST(ConditionRewards, Errors) {
  EXPECT_THROW(select_condition_rewards({}, RewardDomain::kContinuous), NoData);
  const std::vector<double> v = {1, 2};
  EXPECT_THROW(select_condition_rewards(v, RewardDomain::kContinuous, 90, 10), InvalidConfig);
  EXPECT_THROW(select_condition_rewards(v, RewardDomain::kContinuous, 0, 10), InvalidConfig);
}

TEST(ConditionRewards, HighConditionMonotoneInQ1) {
  Rng rng(6);
  std::vector<double> v(57);
  for (double& x : v) x = rng.normal();
  double previous = -1e300;
  for (double q1 = 11; q1 < 100; q1 += 1) {
    const double high = select_condition_rewards(v, RewardDomain::kContinuous, 10, q1).high;
    EXPECT_GE(high, previous);
    previous = high;
  }
}

neural::CvaeShape toy_shape() {
  neural::CvaeShape shape;
  shape.slot_sizes = {4};
  shape.context_dim = 3;
  return shape;
}

// Action 2 is always rewarded; every other action never is.
std::vector<Observation> single_winner_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Observation> data;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = rng.uniform_index(4);
    Context c{{rng.normal(), rng.normal(), rng.normal()}};
    data.push_back({c, ActionId{a}, Reward::binary(a == 2), 0.25});
  }
  return data;
}

class CvaeRcpTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    neural::TrainConfig cfg;
    cfg.steps = 2000;
    cfg.seed = 7;
    trained_ = new CvaeRcp(toy_shape(), cfg);
    trained_->retrain(single_winner_data(500, 1));
  }
  static void TearDownTestSuite() {
    delete trained_;
    trained_ = nullptr;
  }
  static CvaeRcp* trained_;
};

CvaeRcp* CvaeRcpTest::trained_ = nullptr;

TEST_F(CvaeRcpTest, TrainingImprovesTheElbo) {
  const neural::TrainReport& report = trained_->last_report();
  double head = 0;
  double tail = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    head += report.losses[i];
    tail += report.losses[report.losses.size() - 1 - i];
  }
  EXPECT_LT(tail, head);
  EXPECT_GT(report.final_holdout_elbo, report.initial_holdout_elbo);
}

TEST_F(CvaeRcpTest, HighConditionConcentratesOnTheRewardedAction) {
  Rng rng(8);
  int hits = 0;
  constexpr int kContexts = 200;
  for (int i = 0; i < kContexts; ++i) {
    const Context c{{rng.normal(), rng.normal(), rng.normal()}};
    const ProbabilityVector p = trained_->policy(c, 1.0, rng).joint();
    hits += argmax(p.values()) == 2 ? 1 : 0;
  }
  EXPECT_GE(hits, kContexts * 9 / 10);
}

double total_variation(const ProbabilityVector& a, const ProbabilityVector& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += 0.5 * std::abs(a[i] - b[i]);
  return tv;
}

TEST_F(CvaeRcpTest, MonteCarloAveragingStaysNormalized) {
  Rng rng(9);
  const Context c{{0.3, -0.2, 1.0}};
  const neural::Matrix z5 = neural::Cvae::standard_normal(8, 5, rng);
  const neural::Matrix z1 = neural::Cvae::standard_normal(8, 1, rng);
  for (double r : {0.0, 1.0}) {
    const ProbabilityVector five = trained_->policy_with_latents(c, r, z5).joint();
    const ProbabilityVector one = trained_->policy_with_latents(c, r, z1).joint();
    double s5 = 0.0;
    double s1 = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      s5 += five[a];
      s1 += one[a];
    }
    EXPECT_NEAR(s5, 1.0, 1e-9);
    EXPECT_NEAR(s1, 1.0, 1e-9);
  }
  const ProbabilityVector five = trained_->policy_with_latents(c, 0.0, z5).joint();
  const ProbabilityVector one = trained_->policy_with_latents(c, 0.0, z1).joint();
  EXPECT_NE(five, one);
}

// Where the condition pins down the action, five latent draws match the
// 64-draw reference.
TEST_F(CvaeRcpTest, FiveLatentsMatchReferenceOnDeterminedCondition) {
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const Context c{{rng.normal(), rng.normal(), rng.normal()}};
    const neural::Matrix z64 = neural::Cvae::standard_normal(8, 64, rng);
    const neural::Matrix z5 = neural::Cvae::standard_normal(8, 5, rng);
    EXPECT_LT(total_variation(trained_->policy_with_latents(c, 1.0, z64).joint(),
                              trained_->policy_with_latents(c, 1.0, z5).joint()),
              0.1);
  }
}

// Where several actions share the condition, each latent draw picks nearly
// one action, so the five-draw estimate carries Monte Carlo error; it stays
// within four standard errors of the reference.
TEST_F(CvaeRcpTest, FiveLatentsWithinMonteCarloErrorOnAmbiguousCondition) {
  Rng rng(10);
  const Context c{{0.3, -0.2, 1.0}};
  const neural::Matrix z64 = neural::Cvae::standard_normal(8, 64, rng);
  const neural::Matrix z5 = neural::Cvae::standard_normal(8, 5, rng);
  const ProbabilityVector reference = trained_->policy_with_latents(c, 0.0, z64).joint();
  const ProbabilityVector five = trained_->policy_with_latents(c, 0.0, z5).joint();
  for (std::size_t a = 0; a < 4; ++a) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < 64; ++k) {
      const double d = trained_->policy_with_latents(c, 0.0, z64.col(k)).joint()[a] - reference[a];
      sq += d * d;
    }
    const double var = sq / 63.0;
    EXPECT_LE(std::abs(five[a] - reference[a]), 4.0 * std::sqrt(var / 5.0 + var / 64.0) + 1e-9) << "action " << a;
  }
}

TEST(CvaeRcp, RetrainIsDeterministic) {
  neural::TrainConfig cfg;
  cfg.steps = 100;
  cfg.seed = 3;
  CvaeRcp a(toy_shape(), cfg);
  CvaeRcp b(toy_shape(), cfg);
  const std::vector<Observation> data = single_winner_data(80, 2);
  a.retrain(data);
  b.retrain(data);
  neural::Cvae ma = a.model();
  neural::Cvae mb = b.model();
  const neural::ParameterList pa = ma.parameters();
  const neural::ParameterList pb = mb.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(CvaeRcp, ErrorsBeforeTraining) {
  CvaeRcp model(toy_shape(), neural::TrainConfig{});
  Rng rng(1);
  EXPECT_THROW(model.policy(Context{{0, 0, 0}}, 1.0, rng), NotTrained);
  EXPECT_THROW(model.retrain(), NoData);
  EXPECT_THROW(CvaeRcp(toy_shape(), neural::TrainConfig{}, 0), InvalidConfig);
}

TEST(SlotMixture, JointMatchesProductOfSlots) {
  Rng rng(10);
  std::vector<neural::Matrix> per_slot;
  for (std::size_t size : {2u, 3u}) {
    neural::Matrix m(static_cast<Eigen::Index>(size), 4);
    for (Eigen::Index z = 0; z < 4; ++z) {
      std::vector<double> w(size);
      for (double& x : w) x = rng.gamma(1.0);
      const ProbabilityVector p = normalize(w);
      for (std::size_t i = 0; i < size; ++i) m(static_cast<Eigen::Index>(i), z) = p[i];
    }
    per_slot.push_back(m);
  }
  const SlotMixture mix({2, 3}, per_slot);
  const ProbabilityVector joint = mix.joint();
  const SlotLayout layout({2, 3});
  for (std::size_t flat = 0; flat < 6; ++flat) {
    EXPECT_NEAR(joint[flat], mix.probability(layout.unflatten(flat).choices), 1e-15);
  }
  const std::vector<ProbabilityVector> marg = mix.marginals();
  EXPECT_NEAR(marg[0][1], joint[3] + joint[4] + joint[5], 1e-12);
}

}  // namespace
}  // namespace gmb::rcp
