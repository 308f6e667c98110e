#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixpoint/fixedpoints.hpp"
#include "fixpoint/learners.hpp"

namespace fixpoint {

enum class TruthRule { origin, random_boundary, explicit_value };

struct FixedPointConstants {
  std::optional<double> kappa1;  // default 1/sigma (1 without noise)
  double kappa2 = 1.0;
  std::optional<double> eta1;  // default 1/sigma (1 without noise)
  double eta2 = 1.0;
};

struct ExperimentConfig {
  ClassSpec cls{ConvexBody::lp_ball(1, 2.0)};
  NoiseModel noise;
  TruthRule truth_rule = TruthRule::origin;
  Vector truth;  // explicit_value only
  std::vector<int> sample_sizes;
  int trials = 1;
  std::vector<std::string> learners{"erm"};
  ScalePolicy scale;  // net_erm scale; automatic uses the row's gamma values
  FixedPointConstants constants;
  GridConfig grid;
  int shift_count = 8;
  int pool_size = 4096;
  NetPool net_pool = NetPool::localized;
  SolverConfig solver;
  bool timing = false;
  std::uint64_t seed = 0;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

struct TrialRecord {
  int trial = 0;
  std::string learner;
  int N = 0;
  double r_used = 0.0;  // NaN for erm
  int net_size = 0;     // 0 for erm
  double excess_risk = 0.0;
  double elapsed_ms = 0.0;  // 0 unless timing is enabled
};

struct SweepRow {
  int n = 0;
  int N = 0;
  std::string learner;
  int trial_count = 0;
  double excess_q10 = 0.0;
  double excess_median = 0.0;
  double excess_q90 = 0.0;
  double gammaM_sq = 0.0;
  double gammaQ_sq = 0.0;
  double rM_sq = 0.0;
  double rQ_sq = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trials;
  std::vector<std::string> errors;  // one message per failed trial or row
  int convergence_failures = 0;      // errors caused by an exhausted solver budget
};

/// Per sample size: the four fixed points once, then every learner on
/// `trials` seeded datasets. Failures are recorded and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& config);

/// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

struct GapRow {
  int n = 0;
  int N = 0;
  double rM_hat = 0.0;
  double gammaM_hat = 0.0;
  double rM_order = 0.0;
  double ratio = 0.0;
};

struct GapConstants {
  double kappa1 = 2.0;
  double eta1 = 1.0;
};

/// r_M and gamma_M of the unit l_p ball for each n (shift set {0}), with the
/// constant-free order prediction for r_M.
std::vector<GapRow> gap_demo(double p, const std::vector<int>& dimensions, int N, const GapConstants& constants,
                             const GridConfig& grid, std::uint64_t seed);

/// Solution of lp_width_order(n, p, r) = kappa r^2 sqrt(N).
double lp_r_m_order(int n, double p, int N, double kappa);

/// Formats a double with 10 significant digits ("nan" for NaN).
std::string format_number(double x);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
void write_gap_csv(std::ostream& out, const std::vector<GapRow>& rows);
void write_curve_csv(std::ostream& out, const FixedPointResult& result);

}  // namespace fixpoint
