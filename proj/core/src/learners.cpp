#include "fixpoint/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fixpoint/error.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/parallel.hpp"
#include "internal.hpp"

namespace fixpoint {

using detail::require;

NoiseModel NoiseModel::gaussian(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "noise: gaussian sigma must be positive");
  return {Kind::gaussian, sigma, 0.0};
}

NoiseModel NoiseModel::student_t(double q, double sigma) {
  require(q > 2.0 && std::isfinite(q), "noise: student_t requires q > 2");
  require(sigma > 0.0 && std::isfinite(sigma), "noise: student_t sigma must be positive");
  return {Kind::student_t, sigma, q};
}

double NoiseModel::draw(Rng& rng) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::gaussian: return sigma * rng.normal();
    case Kind::student_t: {
      const double nu = degrees_of_freedom();
      return sigma * std::sqrt((nu - 2.0) / nu) * rng.student_t(nu);
    }
  }
  return 0.0;
}

std::string to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::none: return "none";
    case NoiseModel::Kind::gaussian: return "gaussian";
    case NoiseModel::Kind::student_t: return "student_t";
  }
  return "unknown";
}

Dataset generate_dataset(const ClassSpec& cls, const Vector& truth, const NoiseModel& noise, int N, std::uint64_t seed) {
  require(N >= 1, "generate_dataset: N must be >= 1");
  require(truth.size() == cls.body.dimension(), "generate_dataset: truth has the wrong dimension");
  require(contains(cls.body, truth), "generate_dataset: truth does not lie in the body");
  const int n = cls.body.dimension();
  Dataset data;
  data.X.resize(N, n);
  data.Y.resize(N);
  data.truth = truth;
  data.noise = noise;
  data.design = cls.design;
  data.seed = seed;
  for (int i = 0; i < N; ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    data.X.row(i) = sample_design_row(cls.design, n, seed, index).transpose();
    Rng rng = Rng::keyed(seed, Stream::noise_values, index);
    data.Y[i] = data.X.row(i).dot(truth) + noise.draw(rng);
  }
  return data;
}

double empirical_loss(const Dataset& data, const Vector& t) {
  return (data.X * t - data.Y).squaredNorm() / static_cast<double>(data.sample_size());
}

LearnerOutput erm(const ConvexBody& body, const Dataset& data, const SolverConfig& solver) {
  require(data.sample_size() >= 1, "erm: dataset is empty");
  require(data.X.cols() == body.dimension(), "erm: design and body dimensions differ");
  require(solver.max_iterations >= 1 && solver.tolerance > 0.0, "erm: invalid solver configuration");

  const double inv_n = 1.0 / static_cast<double>(data.sample_size());
  const Matrix gram = inv_n * data.X.transpose() * data.X;
  const Vector xty = inv_n * data.X.transpose() * data.Y;
  const double yy = inv_n * data.Y.squaredNorm();
  auto objective = [&](const Vector& t) { return t.dot(gram * t) - 2.0 * t.dot(xty) + yy; };
  auto gradient = [&](const Vector& t) -> Vector { return 2.0 * (gram * t - xty); };

  LearnerOutput out;
  const int n = body.dimension();
  const double top = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  if (!(top > 1e-300)) {
    out.estimate = project(body, Vector::Zero(n));
    out.empirical_loss = empirical_loss(data, out.estimate);
    out.excess_risk = (out.estimate - data.truth).squaredNorm();
    out.objective_trace.push_back(out.empirical_loss);
    return out;
  }

  // Monotone FISTA: the accepted iterate is the better of the prox step and
  // the previous iterate, so the objective trace never increases.
  double L = top;
  Vector x = project(body, Vector::Zero(n));
  Vector x_prev = x;
  Vector y = x;
  Vector z = x;
  double fx = objective(x);
  double theta = 1.0;
  out.objective_trace.push_back(fx);
  for (int it = 1; it <= solver.max_iterations; ++it) {
    const Vector gy = gradient(y);
    const double fy = objective(y);
    for (;;) {
      z = project(body, y - gy / L);
      const Vector d = z - y;
      if (objective(z) <= fy + gy.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
      L *= 2.0;
    }
    const double fz = objective(z);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    y = x + (theta / theta_next) * (z - x) + ((theta - 1.0) / theta_next) * (x - x_prev);
    theta = theta_next;
    out.objective_trace.push_back(fx);
    out.iterations = it;

    // Stationarity: a plain projected gradient step from x barely moves.
    const Vector step = project(body, x - gradient(x) / L) - x;
    if (step.norm() <= solver.tolerance * (1.0 + x.norm())) {
      out.estimate = x;
      out.empirical_loss = fx;
      out.excess_risk = (x - data.truth).squaredNorm();
      return out;
    }
  }
  throw ConvergenceError("erm: no convergence within the iteration budget", x, fx);
}

std::vector<Vector> build_net(const ConvexBody& body, double r, int pool_size, std::uint64_t seed) {
  require(r > 0.0, "build_net: r must be positive");
  require(pool_size >= 1, "build_net: pool size must be >= 1");
  return greedy_pack(sample_points(body, pool_size, SampleMode::mixed, seed), r);
}

ScalePolicy ScalePolicy::explicit_r(double r) {
  require(r > 0.0, "scale policy: explicit r must be positive");
  ScalePolicy policy;
  policy.mode = Mode::explicit_scale;
  policy.r = r;
  return policy;
}

ScalePolicy ScalePolicy::automatic_scale(std::optional<double> eta1, double eta2) {
  ScalePolicy policy;
  policy.mode = Mode::automatic;
  policy.eta1 = eta1;
  policy.eta2 = eta2;
  return policy;
}

double noise_level(const ConvexBody& body, const Dataset& data, const SolverConfig& solver) {
  if (data.noise.kind != NoiseModel::Kind::none) return data.noise.sigma;
  const LearnerOutput pilot = erm(body, data, solver);
  const int dof = std::max(1, data.sample_size() - body.dimension());
  return std::sqrt(pilot.empirical_loss * data.sample_size() / dof);
}

double resolve_net_scale(const ClassSpec& cls, const Dataset& data, const ScalePolicy& policy, std::uint64_t seed,
                         const SolverConfig& solver) {
  if (policy.mode == ScalePolicy::Mode::explicit_scale) {
    require(policy.r > 0.0, "net_erm: explicit r must be positive");
    return policy.r;
  }
  require(policy.eta2 > 0.0, "net_erm: eta2 must be positive");
  const double grid_min = scale_grid(cls.body, policy.grid).front();
  const auto shifts = default_shifts(cls.body, policy.shift_count, seed);
  const int N = data.sample_size();

  double eta1 = 0.0;
  if (policy.eta1) {
    eta1 = *policy.eta1;
    require(eta1 > 0.0, "net_erm: eta1 must be positive");
  } else {
    const double sigma = noise_level(cls.body, data, solver);
    eta1 = sigma > 0.0 ? 1.0 / sigma : std::numeric_limits<double>::infinity();
  }

  double gamma_m = grid_min;
  if (std::isfinite(eta1))
    gamma_m = solve_fixed_point(FixedPointKind::gamma_M, cls, N, eta1, shifts, policy.grid, seed).value;
  const double gamma_q = solve_fixed_point(FixedPointKind::gamma_Q, cls, N, policy.eta2, shifts, policy.grid, seed).value;
  return std::max({gamma_m, gamma_q, grid_min});
}

namespace {

// Uniform points of the ball B(center, radius), pulled into T along the
// segment towards center (a member of T) by bisection on membership.
std::vector<Vector> localized_net_pool(const ConvexBody& body, const Vector& center, double radius, int pool_size,
                                       std::uint64_t seed) {
  const int n = body.dimension();
  std::vector<Vector> pool(static_cast<std::size_t>(pool_size));
  parallel_for(pool.size(), [&](std::size_t i) {
    Rng rng = Rng::keyed(seed, Stream::localized_pool, i);
    Vector direction = rng.normal_vector(n);
    direction.normalize();
    const Vector x = center + radius * std::pow(rng.uniform(), 1.0 / n) * direction;
    if (contains(body, x, 0.0)) {
      pool[i] = x;
      return;
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (contains(body, center + mid * (x - center), 0.0) ? lo : hi) = mid;
    }
    pool[i] = center + lo * (x - center);
  });
  return pool;
}

std::size_t nearest(const std::vector<Vector>& points, const Vector& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

LearnerOutput net_erm(const ClassSpec& cls, const Dataset& data, const NetErmConfig& config, std::uint64_t seed) {
  require(config.pool_size >= 1, "net_erm: pool size must be >= 1");
  require(data.X.cols() == cls.body.dimension(), "net_erm: design and body dimensions differ");
  const double r = resolve_net_scale(cls, data, config.scale, seed, config.solver);

  const std::uint64_t pool_seed = detail::derive_seed(seed, static_cast<std::uint64_t>(Stream::pool_points));
  std::vector<Vector> pool;
  if (config.pool == NetPool::localized) {
    const Vector pilot = erm(cls.body, data, config.solver).estimate;
    pool = localized_net_pool(cls.body, pilot, 4.0 * r, config.pool_size, pool_seed);
  } else {
    pool = sample_points(cls.body, config.pool_size, SampleMode::mixed, pool_seed);
  }
  const auto kept = greedy_pack_indices(pool, r);

  LearnerOutput out;
  out.net.reserve(kept.size());
  for (std::size_t i : kept) out.net.push_back(pool[i]);

  std::vector<double> losses(out.net.size());
  parallel_for(out.net.size(), [&](std::size_t k) { losses[k] = empirical_loss(data, out.net[k]); });
  const auto best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());

  out.estimate = out.net[best];
  out.empirical_loss = losses[best];
  out.excess_risk = (out.estimate - data.truth).squaredNorm();
  out.net_scale = r;
  out.net_size = static_cast<int>(out.net.size());
  const Vector& p0 = pool[nearest(pool, data.truth)];
  out.pool_cover_distance = (out.net[nearest(out.net, p0)] - p0).norm();
  out.truth_net_distance = (out.net[nearest(out.net, data.truth)] - data.truth).norm();
  return out;
}

double excess_risk(const LearnerOutput& output, const Dataset& data) {
  require(output.estimate.size() == data.truth.size(), "excess_risk: estimate and truth dimensions differ");
  return (output.estimate - data.truth).squaredNorm();
}

}  // namespace fixpoint
