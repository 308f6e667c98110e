#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fixpoint/error.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/widths.hpp"
#include "oracles.hpp"

namespace fixpoint {
namespace {

ClassSpec gaussian_class(ConvexBody body) { return ClassSpec{std::move(body), DesignLaw::gaussian}; }

TEST(ChiMean, MatchesIndependentFormula) {
  for (int n : {1, 2, 4, 8, 32, 1024}) EXPECT_NEAR(chi_mean(n), oracle::chi_mean(n), 1e-10 * oracle::chi_mean(n));
  EXPECT_NEAR(chi_mean(4), 1.879971, 1e-6);
}

TEST(EstimateWidth, EuclideanBallAtLargeScale) {
  const auto est = estimate_width(gaussian_class(ConvexBody::lp_ball(4, 2.0)), Vector::Zero(4), 1.5, 4000, 1);
  EXPECT_NEAR(est.value, oracle::chi_mean(4), 3.0 * est.std_error);
  EXPECT_EQ(est.mc_samples, 4000);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(EstimateWidth, EuclideanBallScalesExactly) {
  const auto cls = gaussian_class(ConvexBody::lp_ball(4, 2.0));
  const auto big = estimate_width(cls, Vector::Zero(4), 1.5, 2000, 2);
  const auto small = estimate_width(cls, Vector::Zero(4), 0.25, 2000, 2);
  EXPECT_NEAR(small.value, 0.25 * big.value, 1e-9);
  EXPECT_NEAR(small.value, 0.25 * oracle::chi_mean(4), 3.0 * small.std_error);
}

TEST(EstimateWidth, L1BallInTwoDimensions) {
  const auto est = estimate_width(gaussian_class(ConvexBody::lp_ball(2, 1.0)), Vector::Zero(2), 1.0, 8000, 3);
  EXPECT_NEAR(est.value, 2.0 / std::sqrt(std::numbers::pi), 3.0 * est.std_error);
}

TEST(EstimateWidth, RespectsBallBound) {
  const auto cls = gaussian_class(ConvexBody::lp_ball(6, 1.5));
  for (double s : {0.05, 0.2, 1.0}) {
    const auto est = estimate_width(cls, Vector::Zero(6), s, 500, 4);
    EXPECT_GE(est.value, 0.0);
    EXPECT_LE(est.value, s * oracle::chi_mean(6) + 3.0 * est.std_error);
  }
}

TEST(EstimateWidth, RejectsBadArguments) {
  const auto cls = gaussian_class(ConvexBody::lp_ball(2, 2.0));
  EXPECT_THROW(estimate_width(cls, Vector::Zero(2), 0.0, 100, 1), InvalidArgument);
  EXPECT_THROW(estimate_width(cls, Vector::Zero(2), 1.0, 1, 1), InvalidArgument);
  EXPECT_THROW(estimate_width(cls, Vector::Constant(2, 3.0), 1.0, 100, 1), InvalidArgument);
}

TEST(EstimateWidth, NondecreasingInScale) {
  const auto cls = gaussian_class(ConvexBody::lp_ball(5, 1.5));
  Vector shift = Vector::Zero(5);
  shift[0] = 0.4;
  double previous = 0.0, previous_se = 0.0;
  for (double s : {0.02, 0.08, 0.3, 0.9, 2.0}) {
    const auto est = estimate_width(cls, shift, s, 400, 5);
    EXPECT_GE(est.value, previous - 3.0 * std::hypot(est.std_error, previous_se));
    previous = est.value;
    previous_se = est.std_error;
  }
}

TEST(EstimateWidth, ShiftIsDominatedByOrigin) {
  const auto body = ConvexBody::lp_ball(6, 1.5);
  const auto cls = gaussian_class(body);
  const auto shifts = sample_points(body, 4, SampleMode::boundary, 6);
  for (double r : {0.05, 0.2}) {
    const auto origin = estimate_width(cls, Vector::Zero(6), 2.0 * r, 600, 7);
    for (const auto& f : shifts) {
      const auto shifted = estimate_width(cls, f, 4.0 * r, 600, 7);
      EXPECT_LE(shifted.value, 2.0 * origin.value + 6.0 * std::max(shifted.std_error, origin.std_error));
    }
  }
}

TEST(EstimateWidth, SudakovConsistency) {
  const auto body = ConvexBody::lp_ball(4, 1.5);
  const auto cls = gaussian_class(body);
  for (double s : {0.1, 0.4}) {
    const auto width = estimate_width(cls, Vector::Zero(4), s, 400, 8);
    const auto pool = localized_pool(body, Vector::Zero(4), s, 1024, 9);
    for (double eps : {0.25 * s, 0.5 * s}) {
      const double count = static_cast<double>(greedy_pack(pool, eps).size());
      EXPECT_LE(eps * std::sqrt(std::log(count)), 8.0 * (width.value + 3.0 * width.std_error));
    }
  }
}

TEST(EstimateWidth, IndependentOfWorkerCount) {
  const auto cls = gaussian_class(ConvexBody::lp_ball(5, 1.5));
  const std::size_t saved = worker_count();
  set_worker_count(1);
  const auto serial = estimate_width(cls, Vector::Zero(5), 0.3, 300, 10);
  set_worker_count(4);
  const auto parallel = estimate_width(cls, Vector::Zero(5), 0.3, 300, 10);
  set_worker_count(saved);
  EXPECT_EQ(serial.value, parallel.value);
  EXPECT_EQ(serial.std_error, parallel.std_error);
}

TEST(LpWidthOrder, Branches) {
  const int n = 64;
  const double threshold = std::pow(n, -(1.0 / 1.5 - 0.5));
  EXPECT_NEAR(lp_width_order(n, 1.5, 1.0), std::cbrt(64.0), 1e-12);
  EXPECT_NEAR(lp_width_order(n, 1.5, 0.1), 0.1 * 8.0, 1e-12);
  EXPECT_NEAR(lp_width_order(n, 1.5, threshold), threshold * 8.0, 1e-12);
  EXPECT_NEAR(threshold * 8.0, std::cbrt(64.0), 1e-12);
  EXPECT_THROW(lp_width_order(n, 2.0, 1.0), InvalidArgument);
  EXPECT_THROW(lp_width_order(n, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(lp_width_order(1, 1.5, 1.0), InvalidArgument);
}

}  // namespace
}  // namespace fixpoint
