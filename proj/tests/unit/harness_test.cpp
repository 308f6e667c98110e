#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixpoint/error.hpp"
#include "fixpoint/harness.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/widths.hpp"

namespace fixpoint {
namespace {

using nlohmann::json;

json small_config() {
  return json::parse(R"({
    "body": {"variant": "lp_ball", "n": 3, "p": 2, "R": 1},
    "noise": {"kind": "gaussian", "sigma": 0.25},
    "truth": "random_boundary",
    "N": [16, 64],
    "trials": 4,
    "learners": ["erm", "net_erm"],
    "scale_policy": {"mode": "explicit", "r": 0.2},
    "grid": {"mc_samples": 64, "pool_size": 256},
    "shift_count": 1,
    "pool_size": 256,
    "seed": 5
  })");
}

std::string sweep_csv(const ExperimentConfig& config) {
  std::ostringstream out;
  write_sweep_csv(out, run_sweep(config).rows);
  return out.str();
}

TEST(Quantile, TypeSevenInterpolation) {
  const std::vector<double> values{4.0, 1.0, 3.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(quantile(values, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(values, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(quantile(values, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(quantile(values, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(values, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.3), 7.0);
  EXPECT_THROW(quantile({}, 0.5), InvalidArgument);
}

TEST(Config, RoundTripsThroughJson) {
  const auto config = experiment_from_json(small_config());
  EXPECT_EQ(config.sample_sizes, (std::vector<int>{16, 64}));
  EXPECT_EQ(config.learners.size(), 2u);
  EXPECT_EQ(config.scale.mode, ScalePolicy::Mode::explicit_scale);
  const auto again = experiment_from_json(experiment_to_json(config));
  EXPECT_EQ(experiment_to_json(again), experiment_to_json(config));
}

TEST(Config, RejectsInvalidInput) {
  auto bad = small_config();
  bad["N"] = {64, 16};
  EXPECT_THROW(experiment_from_json(bad), InvalidArgument);
  bad = small_config();
  bad["colour"] = "blue";
  EXPECT_THROW(experiment_from_json(bad), InvalidArgument);
  bad = small_config();
  bad["learner"] = "magic";
  bad.erase("learners");
  EXPECT_THROW(experiment_from_json(bad), InvalidArgument);
  bad = small_config();
  bad["truth"] = {2.0, 0.0, 0.0};
  EXPECT_THROW(experiment_from_json(bad), InvalidArgument);
  bad = small_config();
  bad.erase("body");
  EXPECT_THROW(experiment_from_json(bad), InvalidArgument);
}

TEST(Sweep, NoiselessErmRecoversTruth) {
  auto j = small_config();
  j["noise"] = "none";
  j["learners"] = {"erm"};
  j["N"] = {8, 32};
  const auto result = run_sweep(experiment_from_json(j));
  EXPECT_TRUE(result.errors.empty());
  ASSERT_EQ(result.trials.size(), 8u);
  for (const auto& trial : result.trials) EXPECT_LE(trial.excess_risk, 1e-10);
}

TEST(Sweep, RowsAreOrderedAndQuantilesSorted) {
  const auto config = experiment_from_json(small_config());
  const auto result = run_sweep(config);
  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_EQ(result.rows[0].N, 16);
  EXPECT_EQ(result.rows[0].learner, "erm");
  EXPECT_EQ(result.rows[1].learner, "net_erm");
  EXPECT_EQ(result.rows[3].N, 64);
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.n, 3);
    EXPECT_EQ(row.trial_count, 4);
    EXPECT_LE(row.excess_q10, row.excess_median);
    EXPECT_LE(row.excess_median, row.excess_q90);
  }
  for (const auto& trial : result.trials) {
    if (trial.learner == "erm") {
      EXPECT_TRUE(std::isnan(trial.r_used));
    } else {
      EXPECT_DOUBLE_EQ(trial.r_used, 0.2);
      EXPECT_GE(trial.net_size, 1);
    }
    EXPECT_EQ(trial.elapsed_ms, 0.0);
  }
}

TEST(Sweep, PredictionsMatchStandaloneSolver) {
  const auto config = experiment_from_json(small_config());
  const auto result = run_sweep(config);
  // Row predictions come from the fixedpoints module; r_Q with kappa2 = 1 on a
  // 3-ball floors for every N >= 4.
  const double floor = scale_grid(config.cls.body, config.grid).front();
  for (const auto& row : result.rows) EXPECT_DOUBLE_EQ(row.rQ_sq, floor * floor);
  EXPECT_EQ(result.rows[0].rM_sq, result.rows[1].rM_sq);
  EXPECT_GE(result.rows[0].rM_sq, result.rows[2].rM_sq);
}

TEST(Sweep, CsvIsReproducibleAcrossWorkerCounts) {
  const auto config = experiment_from_json(small_config());
  const std::size_t saved = worker_count();
  set_worker_count(1);
  const auto serial = sweep_csv(config);
  set_worker_count(4);
  const auto parallel = sweep_csv(config);
  set_worker_count(saved);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial.substr(0, serial.find('\n')),
            "n,N,learner,trial_count,excess_q10,excess_median,excess_q90,gammaM_sq,gammaQ_sq,rM_sq,rQ_sq");
}

TEST(Sweep, ErmRiskDecreasesWithSampleSize) {
  auto j = small_config();
  j["body"] = json::parse(R"({"variant":"lp_ball","n":8,"p":2,"R":1})");
  j["learners"] = {"erm"};
  j["N"] = {64, 256, 1024};
  j["trials"] = 15;
  const auto result = run_sweep(experiment_from_json(j));
  ASSERT_EQ(result.rows.size(), 3u);
  EXPECT_GT(result.rows[0].excess_median, result.rows[1].excess_median);
  EXPECT_GT(result.rows[1].excess_median, result.rows[2].excess_median);
}

TEST(GapDemo, PreconditionsNameTheFailingDimension) {
  GridConfig grid;
  try {
    gap_demo(1.5, {64, 8}, 64, {}, grid, 1);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("n = 8"), std::string::npos);
  }
  EXPECT_THROW(gap_demo(2.0, {64}, 64, {}, grid, 1), InvalidArgument);
  EXPECT_THROW(gap_demo(1.1, {64}, 2, {}, grid, 1), InvalidArgument);
}

TEST(GapDemo, SingleDimensionGivesOneRow) {
  GridConfig grid;
  grid.mc_samples = 64;
  grid.pool_size = 512;
  const auto rows = gap_demo(1.5, {16}, 8, {}, grid, 2);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n, 16);
  EXPECT_EQ(rows[0].N, 8);
  EXPECT_NEAR(rows[0].ratio, rows[0].gammaM_hat / rows[0].rM_hat, 1e-15);
  EXPECT_NEAR(lp_width_order(16, 1.5, rows[0].rM_order), 2.0 * rows[0].rM_order * rows[0].rM_order * std::sqrt(8.0),
              1e-9);
  std::ostringstream out;
  write_gap_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "n,N,rM_hat,gammaM_hat,rM_order,ratio");
}

TEST(FormatNumber, TenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

}  // namespace
}  // namespace fixpoint
