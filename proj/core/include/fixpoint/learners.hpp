#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fixpoint/fixedpoints.hpp"
#include "fixpoint/geometry.hpp"
#include "fixpoint/random.hpp"

namespace fixpoint {

/// Additive noise W, independent of X and mean zero.
struct NoiseModel {
  enum class Kind { none, gaussian, student_t };

  Kind kind = Kind::none;
  double sigma = 0.0;  // standard deviation (gaussian and student_t)
  double q = 0.0;      // student_t: moment index; degrees of freedom are 2q

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma);
  static NoiseModel student_t(double q, double sigma);

  double degrees_of_freedom() const { return 2.0 * q; }
  double draw(Rng& rng) const;
};

std::string to_string(NoiseModel::Kind kind);

struct Dataset {
  Matrix X;  // N x n, rows i.i.d. from the design law
  Vector Y;
  Vector truth;
  NoiseModel noise;
  DesignLaw design = DesignLaw::gaussian;
  std::uint64_t seed = 0;

  int sample_size() const { return static_cast<int>(X.rows()); }
};

/// Y_i = <t0, X_i> + W_i. Row i and noise value i come from independent
/// keyed streams, so any prefix of a dataset is reproducible on its own.
Dataset generate_dataset(const ClassSpec& cls, const Vector& truth, const NoiseModel& noise, int N, std::uint64_t seed);

/// Mean squared residual (1/N) sum (<t, X_i> - Y_i)^2.
double empirical_loss(const Dataset& data, const Vector& t);

struct SolverConfig {
  int max_iterations = 10'000;
  double tolerance = 1e-10;  // on the relative length of a projected gradient step
};

struct LearnerOutput {
  Vector estimate;
  double empirical_loss = 0.0;
  double excess_risk = 0.0;
  std::optional<double> net_scale;
  std::optional<int> net_size;
  int iterations = 0;
  std::vector<double> objective_trace;  // ERM objective after each accepted step
  std::vector<Vector> net;
  // Net maximality against the pool: the pool point nearest t0 lies within
  // net_scale of its nearest net point.
  std::optional<double> pool_cover_distance;
  // Distance from t0 to its nearest net point.
  std::optional<double> truth_net_distance;
};

/// argmin over T of the empirical loss by monotone accelerated projected
/// gradient with backtracking, started at 0. Throws ConvergenceError with
/// the best iterate when the budget runs out.
LearnerOutput erm(const ConvexBody& body, const Dataset& data, const SolverConfig& solver = {});

/// Greedy r-separated subset of a seeded mixed-mode pool of T (pool index
/// order). Every pool point lies within r of the net.
std::vector<Vector> build_net(const ConvexBody& body, double r, int pool_size, std::uint64_t seed);

enum class NetPool {
  localized,  // uniform in the ball of radius 4r around a pilot ERM fit, pulled into T
  global,     // the mixed-mode sample of T used by build_net
};

struct ScalePolicy {
  enum class Mode { explicit_scale, automatic };

  Mode mode = Mode::automatic;
  double r = 0.0;                  // explicit scale
  std::optional<double> eta1;      // default 1/sigma
  double eta2 = 1.0;
  GridConfig grid;
  int shift_count = 8;

  static ScalePolicy explicit_r(double r);
  static ScalePolicy automatic_scale(std::optional<double> eta1 = std::nullopt, double eta2 = 1.0);
};

struct NetErmConfig {
  ScalePolicy scale;
  NetPool pool = NetPool::localized;
  int pool_size = 4096;
  SolverConfig solver;
};

/// Noise level used for eta1 = 1/sigma: the noise model's sigma when it is
/// known, otherwise the residual level of a pilot ERM fit.
double noise_level(const ConvexBody& body, const Dataset& data, const SolverConfig& solver = {});

/// max{gamma_M(eta1), gamma_Q(eta2)}, floored at the grid minimum.
double resolve_net_scale(const ClassSpec& cls, const Dataset& data, const ScalePolicy& policy, std::uint64_t seed,
                         const SolverConfig& solver = {});

/// ERM over a maximal r-separated net V; lowest index wins ties.
LearnerOutput net_erm(const ClassSpec& cls, const Dataset& data, const NetErmConfig& config, std::uint64_t seed);

/// |t_hat - t0|^2, the excess risk under an isotropic design and independent noise.
double excess_risk(const LearnerOutput& output, const Dataset& data);

}  // namespace fixpoint
