#include <cmath>

#include <gtest/gtest.h>

#include "fixpoint/error.hpp"
#include "fixpoint/learners.hpp"
#include "fixpoint/parallel.hpp"

namespace fixpoint {
namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

ClassSpec ball(int n) { return ClassSpec{ConvexBody::lp_ball(n, 2.0)}; }

Vector interior_truth(int n) {
  Vector t = Vector::LinSpaced(n, -0.3, 0.3);
  return t;
}

TEST(Noise, FactoriesValidate) {
  EXPECT_THROW(NoiseModel::gaussian(0.0), InvalidArgument);
  EXPECT_THROW(NoiseModel::student_t(2.0, 1.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(NoiseModel::student_t(3.0, 1.0).degrees_of_freedom(), 6.0);
}

TEST(GenerateDataset, NoiselessTargetsAreExact) {
  const auto data = generate_dataset(ball(3), interior_truth(3), NoiseModel::none(), 50, 1);
  EXPECT_EQ(data.sample_size(), 50);
  EXPECT_EQ((data.Y - data.X * data.truth).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GenerateDataset, GaussianNoiseVariance) {
  const auto data = generate_dataset(ball(2), vec({0.1, 0.2}), NoiseModel::gaussian(0.5), 10000, 2);
  const Vector w = data.Y - data.X * data.truth;
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / (w.size() - 1);
  // Var of the sample variance of a gaussian is 2 sigma^4 / (N - 1).
  const double se = std::sqrt(2.0 * std::pow(0.25, 2) / (w.size() - 1));
  EXPECT_NEAR(var, 0.25, 5.0 * se);
}

TEST(GenerateDataset, StudentNoiseMatchesRequestedVariance) {
  const auto data = generate_dataset(ball(2), vec({0.0, 0.0}), NoiseModel::student_t(4.0, 0.5), 40000, 3);
  const Vector w = data.Y - data.X * data.truth;
  const double var = w.squaredNorm() / w.size();
  EXPECT_NEAR(var, 0.25, 0.02);
}

TEST(GenerateDataset, SameSeedIsBitwiseIdentical) {
  const auto a = generate_dataset(ball(4), interior_truth(4), NoiseModel::gaussian(0.3), 30, 4);
  const auto b = generate_dataset(ball(4), interior_truth(4), NoiseModel::gaussian(0.3), 30, 4);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.Y, b.Y);
}

TEST(GenerateDataset, RejectsTruthOutsideBody) {
  EXPECT_THROW(generate_dataset(ball(2), vec({1.0, 1.0}), NoiseModel::none(), 10, 5), InvalidArgument);
  EXPECT_THROW(generate_dataset(ball(2), vec({0.0, 0.0}), NoiseModel::none(), 0, 5), InvalidArgument);
}

TEST(GenerateDataset, NoiseIsAsymptoticallyUncorrelatedWithDesign) {
  const int N = 400;
  const Vector direction = interior_truth(5).normalized();
  int within = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const auto data = generate_dataset(ball(5), interior_truth(5), NoiseModel::gaussian(1.0), N, 100 + trial);
    const Vector w = data.Y - data.X * data.truth;
    const double correlation = w.dot(data.X * direction) / N;
    within += std::abs(correlation) <= 5.0 / std::sqrt(N) ? 1 : 0;
  }
  EXPECT_GE(within, 95);
}

TEST(Erm, RecoversInteriorTruthWithoutNoise) {
  const auto data = generate_dataset(ball(6), interior_truth(6), NoiseModel::none(), 40, 6);
  const auto out = erm(ball(6).body, data);
  EXPECT_LE((out.estimate - data.truth).norm(), 1e-6);
}

TEST(Erm, OneDimensionalKkt) {
  Dataset data;
  data.X = Matrix::Ones(1, 1);
  data.Y = Vector::Constant(1, 2.0);
  data.truth = Vector::Zero(1);
  const auto out = erm(ConvexBody::lp_ball(1, 2.0), data);
  EXPECT_NEAR(out.estimate[0], 1.0, 1e-9);
  EXPECT_NEAR(out.empirical_loss, 1.0, 1e-9);
}

TEST(Erm, ZeroDesignReturnsOrigin) {
  Dataset data;
  data.X = Matrix::Zero(1, 3);
  data.Y = Vector::Constant(1, 0.7);
  data.truth = Vector::Zero(3);
  const auto out = erm(ConvexBody::lp_ball(3, 1.5), data);
  EXPECT_EQ(out.estimate, Vector::Zero(3));
}

TEST(Erm, ObjectiveNeverIncreasesAndEstimateIsFeasible) {
  const auto body = ConvexBody::lp_ball(8, 1.5);
  const ClassSpec cls{body};
  const Vector truth = sample_points(body, 1, SampleMode::boundary, 7).front();
  const auto data = generate_dataset(cls, truth, NoiseModel::gaussian(0.5), 20, 8);
  const auto out = erm(body, data);
  EXPECT_TRUE(contains(body, out.estimate, 1e-8));
  for (std::size_t i = 1; i < out.objective_trace.size(); ++i)
    EXPECT_LE(out.objective_trace[i], out.objective_trace[i - 1] + 1e-15);
  // No feasible member does better.
  for (const auto& t : sample_points(body, 200, SampleMode::mixed, 9))
    EXPECT_GE(empirical_loss(data, t), out.empirical_loss * (1.0 - 1e-8));
}

TEST(Erm, ThrowsWhenBudgetIsExhausted) {
  const auto data = generate_dataset(ball(6), interior_truth(6), NoiseModel::gaussian(1.0), 10, 10);
  SolverConfig tight;
  tight.max_iterations = 1;
  tight.tolerance = 1e-15;
  EXPECT_THROW(erm(ConvexBody::lp_ball(6, 1.5), data, tight), ConvergenceError);
}

TEST(BuildNet, LargeScaleIsSingleton) { EXPECT_EQ(build_net(ConvexBody::lp_ball(3, 2.0), 2.5, 500, 1).size(), 1u); }

TEST(BuildNet, SeparatedAndBoundedByHexagonalPacking) {
  const auto net = build_net(ConvexBody::lp_ball(2, 2.0), 1.0, 4096, 2);
  EXPECT_GE(net.size(), 5u);
  EXPECT_LE(net.size(), 7u);
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j) EXPECT_GE((net[i] - net[j]).norm(), 1.0);
}

TEST(NetErm, SingletonNetReturnsItsPoint) {
  const auto cls = ball(3);
  const auto data = generate_dataset(cls, interior_truth(3), NoiseModel::gaussian(0.1), 30, 11);
  NetErmConfig config;
  config.scale = ScalePolicy::explicit_r(10.0);
  config.pool = NetPool::global;
  const auto out = net_erm(cls, data, config, 12);
  ASSERT_EQ(out.net_size.value(), 1);
  EXPECT_EQ(out.estimate, out.net.front());
  EXPECT_DOUBLE_EQ(out.net_scale.value(), 10.0);
}

TEST(NetErm, PicksLowestLossNetPoint) {
  const auto cls = ball(3);
  const auto data = generate_dataset(cls, interior_truth(3), NoiseModel::none(), 200, 13);
  NetErmConfig config;
  config.scale = ScalePolicy::explicit_r(0.05);
  config.pool_size = 2048;
  const auto out = net_erm(cls, data, config, 14);
  for (const auto& v : out.net) EXPECT_GE(empirical_loss(data, v), out.empirical_loss);
  EXPECT_LE(out.truth_net_distance.value(), 0.05);
  EXPECT_LT(out.pool_cover_distance.value(), 0.05);
  EXPECT_LE((out.estimate - data.truth).norm(), 0.1);
}

TEST(NetErm, ErrorIsControlledByNetScale) {
  const auto cls = ball(8);
  int good = 0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    const Vector truth = sample_points(cls.body, 1, SampleMode::boundary, 200 + trial).front() * 0.5;
    const auto data = generate_dataset(cls, truth, NoiseModel::gaussian(0.25), 256, 300 + trial);
    NetErmConfig config;
    config.scale = ScalePolicy::explicit_r(0.1);
    config.pool_size = 2048;
    const auto out = net_erm(cls, data, config, 400 + trial);
    EXPECT_LT(out.pool_cover_distance.value(), 0.1);
    good += (out.estimate - truth).norm() <= 4.0 * 0.1 ? 1 : 0;
  }
  EXPECT_GE(good, 9);
}

TEST(NetErm, DeterministicAcrossWorkerCounts) {
  const auto cls = ClassSpec{ConvexBody::lp_ball(4, 1.5)};
  const auto data = generate_dataset(cls, Vector::Zero(4), NoiseModel::gaussian(0.2), 64, 15);
  NetErmConfig config;
  config.scale = ScalePolicy::explicit_r(0.2);
  config.pool_size = 1024;
  const std::size_t saved = worker_count();
  set_worker_count(1);
  const auto a = net_erm(cls, data, config, 16);
  set_worker_count(3);
  const auto b = net_erm(cls, data, config, 16);
  set_worker_count(saved);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.net_size, b.net_size);
  EXPECT_EQ(a.empirical_loss, b.empirical_loss);
}

TEST(ExcessRisk, ClosedForm) {
  Dataset data;
  data.truth = Vector::Zero(2);
  LearnerOutput out;
  out.estimate = vec({0.3, 0.4});
  EXPECT_NEAR(excess_risk(out, data), 0.25, 1e-15);
  out.estimate = data.truth;
  EXPECT_EQ(excess_risk(out, data), 0.0);
}

TEST(ExcessRisk, MatchesMonteCarloRiskDifference) {
  const auto cls = ball(3);
  const Vector truth = vec({0.2, -0.1, 0.3});
  LearnerOutput out;
  out.estimate = vec({0.0, 0.1, 0.25});
  const auto fresh = generate_dataset(cls, truth, NoiseModel::gaussian(0.5), 100000, 17);
  const Vector diff = (fresh.X * out.estimate - fresh.Y).array().square() - (fresh.X * truth - fresh.Y).array().square();
  const double mean = diff.mean();
  const double se = std::sqrt((diff.array() - mean).square().sum() / (diff.size() - 1) / diff.size());
  EXPECT_NEAR(mean, excess_risk(out, fresh), 5.0 * se);
}

TEST(ResolveNetScale, NoiselessAutoScaleUsesGammaQ) {
  const auto cls = ball(2);
  const auto data = generate_dataset(cls, Vector::Zero(2), NoiseModel::none(), 100, 18);
  ScalePolicy policy = ScalePolicy::automatic_scale();
  policy.grid.pool_size = 512;
  policy.shift_count = 2;
  const double r = resolve_net_scale(cls, data, policy, 19);
  EXPECT_DOUBLE_EQ(r, scale_grid(cls.body, policy.grid).front());
}

}  // namespace
}  // namespace fixpoint
