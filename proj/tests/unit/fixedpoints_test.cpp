#include <cmath>

#include <gtest/gtest.h>

#include "fixpoint/error.hpp"
#include "fixpoint/fixedpoints.hpp"
#include "fixpoint/packing.hpp"
#include "oracles.hpp"

namespace fixpoint {
namespace {

GridConfig light_grid() {
  GridConfig grid;
  grid.mc_samples = 256;
  grid.pool_size = 512;
  return grid;
}

std::vector<Vector> origin(int n) { return {Vector::Zero(n)}; }

TEST(ScaleGrid, LogSpacedUpToCircumradius) {
  const auto body = ConvexBody::lp_ball(4, 2.0, 3.0);
  const auto scales = scale_grid(body, GridConfig{});
  ASSERT_EQ(scales.size(), 48u);
  EXPECT_DOUBLE_EQ(scales.back(), 3.0);
  EXPECT_NEAR(scales.front(), 3.0 * std::pow(2.0, -20.0), 1e-18);
  const double ratio = scales[1] / scales[0];
  for (std::size_t i = 1; i + 1 < scales.size(); ++i) EXPECT_NEAR(scales[i] / scales[i - 1], ratio, 1e-9);
  GridConfig tiny;
  tiny.points = 8;
  EXPECT_THROW(scale_grid(body, tiny), InvalidArgument);
}

TEST(DefaultShifts, OriginThenBoundary) {
  const auto body = ConvexBody::lp_ball(3, 1.5);
  const auto shifts = default_shifts(body, 8, 1);
  ASSERT_EQ(shifts.size(), 9u);
  EXPECT_EQ(shifts[0], Vector::Zero(3));
  for (std::size_t i = 1; i < shifts.size(); ++i) EXPECT_NEAR(gauge(body, shifts[i]), 1.0, 1e-9);
}

TEST(SolveFixedPoint, RMOnLargeBallMatchesChiMean) {
  const ClassSpec cls{ConvexBody::lp_ball(4, 2.0, 10.0)};
  const auto result = solve_fixed_point(FixedPointKind::r_M, cls, 100, 1.0, origin(4), GridConfig{}, 1);
  const double expected = oracle::chi_mean(4) / 10.0;
  EXPECT_NEAR(result.value, expected, 0.15 * expected);
  EXPECT_FALSE(result.floored);
  EXPECT_FALSE(result.unresolved);
  EXPECT_LE(result.low, result.value);
  EXPECT_LE(result.value, result.high);
  EXPECT_NEAR(ball_oracle(FixedPointKind::r_M, 4, 100, 1.0, 10.0), expected, 1e-10);
}

TEST(SolveFixedPoint, RQFlooredWhenWidthIsSmall) {
  const ClassSpec cls{ConvexBody::lp_ball(4, 2.0)};
  const auto result = solve_fixed_point(FixedPointKind::r_Q, cls, 100, 1.0, origin(4), light_grid(), 2);
  EXPECT_TRUE(result.floored);
  EXPECT_DOUBLE_EQ(result.value, scale_grid(cls.body, light_grid()).front());
  EXPECT_EQ(ball_oracle(FixedPointKind::r_Q, 4, 100, 1.0, 1.0), 0.0);
}

TEST(SolveFixedPoint, RQUnresolvedWhenWidthIsLarge) {
  const ClassSpec cls{ConvexBody::lp_ball(64, 2.0)};
  const auto result = solve_fixed_point(FixedPointKind::r_Q, cls, 1, 0.1, origin(64), light_grid(), 3);
  EXPECT_TRUE(result.unresolved);
  EXPECT_DOUBLE_EQ(result.value, 1.0);
  EXPECT_EQ(ball_oracle(FixedPointKind::r_Q, 64, 1, 0.1, 1.0), 1.0);
}

TEST(SolveFixedPoint, GammaQFlooredOnDisc) {
  const ClassSpec cls{ConvexBody::lp_ball(2, 2.0)};
  const auto result = solve_fixed_point(FixedPointKind::gamma_Q, cls, 100, 1.0, origin(2), light_grid(), 4);
  EXPECT_TRUE(result.floored);
  for (double s : {0.01, 0.1, 0.5})
    EXPECT_LT(std::log(local_pack(cls, Vector::Zero(2), s, 2048, 5).count), 10.0);
}

TEST(SolveFixedPoint, CurveRecordsEveryCell) {
  const ClassSpec cls{ConvexBody::lp_ball(3, 2.0)};
  const auto grid = light_grid();
  const auto result = solve_fixed_point(FixedPointKind::r_M, cls, 50, 1.0, origin(3), grid, 6);
  EXPECT_EQ(result.curve.size(), static_cast<std::size_t>(grid.points + grid.refine_steps));
  for (const auto& point : result.curve) EXPECT_EQ(point.holds, point.lhs <= point.rhs);
}

TEST(SolveFixedPoint, MatchesBallOracleForGammaM) {
  const ClassSpec cls{ConvexBody::lp_ball(4, 2.0)};
  GridConfig grid = light_grid();
  grid.pool_size = 4096;
  const auto result = solve_fixed_point(FixedPointKind::gamma_M, cls, 256, 4.0, origin(4), grid, 7);
  ASSERT_FALSE(result.floored);
  const double oracle_value = ball_oracle(FixedPointKind::gamma_M, 4, 256, 4.0, 1.0);
  EXPECT_NEAR(result.value, oracle_value, 0.5 * oracle_value);
}

TEST(SolveFixedPoint, NonincreasingInConstant) {
  const ClassSpec cls{ConvexBody::lp_ball(6, 1.5)};
  const auto grid = light_grid();
  for (auto kind : {FixedPointKind::r_M, FixedPointKind::gamma_M}) {
    double previous = std::numeric_limits<double>::infinity();
    for (double c : {0.5, 1.0, 2.0, 4.0}) {
      const double value = solve_fixed_point(kind, cls, 64, c, origin(6), grid, 8).value;
      EXPECT_LE(value, previous);
      previous = value;
    }
  }
}

TEST(SolveFixedPoint, NonincreasingInSampleSize) {
  const ClassSpec cls{ConvexBody::lp_ball(6, 1.5)};
  const auto grid = light_grid();
  for (auto kind : {FixedPointKind::r_M, FixedPointKind::gamma_M, FixedPointKind::gamma_Q}) {
    double previous = std::numeric_limits<double>::infinity();
    for (int N : {4, 16, 64, 256}) {
      const double value = solve_fixed_point(kind, cls, N, 1.0, origin(6), grid, 9).value;
      EXPECT_LE(value, previous);
      previous = value;
    }
  }
}

TEST(SolveFixedPoint, GammaDominatedByRM) {
  const ClassSpec cls{ConvexBody::lp_ball(6, 1.5)};
  const auto grid = light_grid();
  const double kappa = 1.0;
  const double r_m = solve_fixed_point(FixedPointKind::r_M, cls, 64, kappa, origin(6), grid, 10).value;
  const double g_m = solve_fixed_point(FixedPointKind::gamma_M, cls, 64, 8.0 * kappa, origin(6), grid, 10).value;
  EXPECT_LE(g_m, 1.25 * r_m);
}

TEST(SolveFixedPoint, ShiftSupWithinFactorTwoOfOrigin) {
  const auto body = ConvexBody::lp_ball(5, 1.5);
  const ClassSpec cls{body};
  const auto grid = light_grid();
  const double at_origin = solve_fixed_point(FixedPointKind::r_M, cls, 64, 1.0, origin(5), grid, 11).value;
  const auto shifted = solve_fixed_point(FixedPointKind::r_M, cls, 64, 1.0, default_shifts(body, 4, 12), grid, 11);
  EXPECT_LE(shifted.value, 2.0 * at_origin * 1.25);
  EXPECT_GE(shifted.value, at_origin);
  EXPECT_EQ(shifted.shifts_probed.size(), 5u);
}

TEST(SolveFixedPoint, RejectsBadInput) {
  const ClassSpec cls{ConvexBody::lp_ball(2, 2.0)};
  EXPECT_THROW(solve_fixed_point(FixedPointKind::r_M, cls, 0, 1.0, origin(2), light_grid(), 1), InvalidArgument);
  EXPECT_THROW(solve_fixed_point(FixedPointKind::r_M, cls, 10, -1.0, origin(2), light_grid(), 1), InvalidArgument);
  EXPECT_THROW(solve_fixed_point(FixedPointKind::r_M, cls, 10, 1.0, {}, light_grid(), 1), InvalidArgument);
  EXPECT_THROW(solve_fixed_point(FixedPointKind::r_M, cls, 10, 1.0, {Vector::Constant(2, 5.0)}, light_grid(), 1),
               InvalidArgument);
  EXPECT_THROW(fixed_point_kind_from_string("r_X"), InvalidArgument);
}

TEST(BallOracle, ClosedForms) {
  EXPECT_NEAR(ball_oracle(FixedPointKind::r_M, 4, 100, 1.0, 10.0), 0.18799712, 1e-7);
  EXPECT_EQ(ball_oracle(FixedPointKind::r_Q, 4, 100, 1.0, 1.0), 0.0);
  EXPECT_EQ(ball_oracle(FixedPointKind::gamma_M, 4, 100, std::numeric_limits<double>::infinity(), 1.0), 0.0);
  EXPECT_NEAR(ball_oracle(FixedPointKind::gamma_M, 4, 256, 4.0, 1.0), std::sqrt(std::log(16.0) * 4 / (16.0 * 256)),
              1e-12);
  EXPECT_EQ(ball_oracle(FixedPointKind::gamma_Q, 8, 1, 1.0, 2.0), 2.0);
}

}  // namespace
}  // namespace fixpoint
