#include "fixpoint/lowerbounds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "fixpoint/error.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/random.hpp"
#include "internal.hpp"

namespace fixpoint {

using detail::require;

Matrix kernel_basis(const Matrix& X) {
  const Eigen::Index n = X.cols();
  if (X.rows() == 0) return Matrix::Identity(n, n);
  const double norm = std::sqrt(
      std::max(0.0, Eigen::SelfAdjointEigenSolver<Matrix>(X.transpose() * X, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff()));
  if (norm == 0.0) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(X.transpose());
  const auto& r = qr.matrixQR();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < std::min(r.rows(), r.cols()); ++i)
    if (std::abs(r(i, i)) > 1e-10 * norm) ++rank;
  const Matrix q = qr.householderQ();
  return q.rightCols(n - rank);
}

VersionSpaceProbe version_space_diameter(const ConvexBody& body, const Matrix& X, int directions, std::uint64_t seed) {
  require(directions >= 1, "version_space_diameter: need at least one direction");
  require(X.cols() == body.dimension(), "version_space_diameter: design and body dimensions differ");
  require(X.allFinite(), "version_space_diameter: non-finite design");

  VersionSpaceProbe probe;
  probe.directions_sampled = directions;
  const Matrix basis = kernel_basis(X);
  probe.kernel_dimension = static_cast<int>(basis.cols());
  probe.direction_values.assign(static_cast<std::size_t>(directions), 0.0);
  if (basis.cols() == 0) return probe;

  auto onto_kernel = [&](const Vector& v) -> Vector { return basis * (basis.transpose() * v); };
  const double diameter = body.diameter();
  std::vector<Vector> maximizers(static_cast<std::size_t>(directions));
  parallel_for(static_cast<std::size_t>(directions), [&](std::size_t k) {
    Rng rng = Rng::keyed(seed, Stream::kernel_directions, k);
    const Vector h = onto_kernel(rng.normal_vector(body.dimension()));
    Vector t = Vector::Zero(body.dimension());
    const double h_norm = h.norm();
    if (h_norm > 0.0) {
      // Projected ascent: P(t + alpha h) climbs to the face of ker(X) cap T
      // that maximizes <h, .>.
      const double alpha = 2.0 * diameter / h_norm;
      for (int it = 0; it < 500; ++it) {
        const Vector next = detail::project_subspace_intersection(body, basis, t + alpha * h);
        const double move = (next - t).norm();
        t = next;
        if (move <= 1e-12 * diameter) break;
      }
      // Pull the kernel point radially into T.
      t = onto_kernel(t);
      const double g = gauge(body, t);
      if (g > 1.0) t /= g;
    }
    maximizers[k] = t;
    probe.direction_values[k] = h.dot(t);
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < maximizers.size(); ++k)
    if (maximizers[k].norm() > maximizers[best].norm()) best = k;
  probe.witness_first = maximizers[best];
  probe.witness_second = -maximizers[best];
  probe.diameter_lower_bound = 2.0 * maximizers[best].norm();
  return probe;
}

std::string to_string(RichnessStatus status) {
  switch (status) {
    case RichnessStatus::holds: return "holds";
    case RichnessStatus::violated: return "violated";
    case RichnessStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

KernelRichnessReport kernel_richness_check(const ClassSpec& cls, double r, int N, double c, int pool_size, int trials,
                                           std::uint64_t seed, int directions) {
  require(r > 0.0, "kernel_richness_check: r must be positive");
  require(c > 0.0, "kernel_richness_check: c must be positive");
  require(N >= 1, "kernel_richness_check: N must be >= 1");
  require(trials >= 1, "kernel_richness_check: trials must be >= 1");

  KernelRichnessReport report;
  const int n = cls.body.dimension();
  const auto packing = pack_localized(cls.body, Vector::Zero(n), 2.0 * r, 0.25 * r, pool_size, seed);
  report.log_packing = std::log(static_cast<double>(packing.count));
  report.required = c * N;
  report.threshold = r / 8.0;
  report.precondition_met = report.log_packing >= report.required;

  report.diameters.assign(static_cast<std::size_t>(trials), 0.0);
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = detail::derive_seed(seed, static_cast<std::uint64_t>(trial));
    Matrix X(N, n);
    for (int i = 0; i < N; ++i)
      X.row(i) = sample_design_row(cls.design, n, trial_seed, static_cast<std::uint64_t>(i)).transpose();
    report.diameters[static_cast<std::size_t>(trial)] =
        version_space_diameter(cls.body, X, directions, trial_seed).diameter_lower_bound;
  }
  const double tol = cls.body.tolerance();
  const auto holding = std::count_if(report.diameters.begin(), report.diameters.end(),
                                     [&](double d) { return d >= report.threshold - tol; });
  report.fraction_holding = static_cast<double>(holding) / trials;
  if (!report.precondition_met)
    report.status = RichnessStatus::inconclusive;
  else
    report.status = holding == trials ? RichnessStatus::holds : RichnessStatus::violated;
  return report;
}

namespace {

void require_symmetric(const BoxSet& box, Eigen::Index dim) {
  require(box.lower.size() == dim && box.upper.size() == dim, "shift-check: box and z dimensions differ");
  require((box.upper.array() >= box.lower.array()).all(), "shift-check: box lower bound exceeds upper bound");
  require((box.lower + box.upper).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + box.upper.cwiseAbs().maxCoeff()),
          "shift-check: box is not centrally symmetric");
}

void require_symmetric(const PolytopeSet& poly, Eigen::Index dim) {
  require(poly.A.cols() == dim && poly.A.rows() == poly.b.size(), "shift-check: polytope and z dimensions differ");
  require(poly.A.rows() >= 1, "shift-check: polytope has no constraints");
  require((poly.b.array() >= 0.0).all(), "shift-check: polytope must contain the origin");
  const double scale = 1.0 + poly.A.cwiseAbs().maxCoeff() + poly.b.cwiseAbs().maxCoeff();
  std::vector<bool> matched(static_cast<std::size_t>(poly.A.rows()), false);
  for (Eigen::Index i = 0; i < poly.A.rows(); ++i) {
    if (matched[static_cast<std::size_t>(i)]) continue;
    bool found = false;
    for (Eigen::Index j = 0; j < poly.A.rows() && !found; ++j) {
      if (j == i || matched[static_cast<std::size_t>(j)]) continue;
      if ((poly.A.row(i) + poly.A.row(j)).cwiseAbs().maxCoeff() <= 1e-12 * scale &&
          std::abs(poly.b[i] - poly.b[j]) <= 1e-12 * scale) {
        matched[static_cast<std::size_t>(i)] = matched[static_cast<std::size_t>(j)] = true;
        found = true;
      }
    }
    require(found, "shift-check: polytope is not centrally symmetric (row " + std::to_string(i) + " has no mirror)");
  }
}

struct Fraction {
  double mean = 0.0;
  double std_error = 0.0;
};

Fraction gaussian_fraction(const PolytopeSet& poly, const Vector& offset, double sigma, int samples, std::uint64_t seed,
                           Stream stream) {
  constexpr int batch = 4096;
  const int batches = (samples + batch - 1) / batch;
  std::vector<long> hits(static_cast<std::size_t>(batches), 0);
  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
    Rng rng = Rng::keyed(seed, stream, b);
    const int begin = static_cast<int>(b) * batch;
    const int end = std::min(samples, begin + batch);
    long count = 0;
    for (int i = begin; i < end; ++i) {
      const Vector x = sigma * rng.normal_vector(offset.size()) - offset;
      if (((poly.A * x).array() <= poly.b.array()).all()) ++count;
    }
    hits[b] = count;
  });
  long total = 0;
  for (long h : hits) total += h;
  Fraction out;
  out.mean = static_cast<double>(total) / samples;
  out.std_error = std::sqrt(out.mean * (1.0 - out.mean) / samples);
  return out;
}

}  // namespace

ShiftCheck gaussian_shift_check(const ShiftSet& set, const Vector& z, double sigma, int mc_samples,
                                std::uint64_t seed) {
  require(sigma > 0.0 && std::isfinite(sigma), "shift-check: sigma must be positive");
  require(z.allFinite(), "shift-check: non-finite z");
  require(mc_samples >= 1000, "shift-check: mc_samples must be >= 1000");
  const double factor = std::exp(-z.squaredNorm() / (2.0 * sigma * sigma));

  ShiftCheck out;
  if (const auto* box = std::get_if<BoxSet>(&set)) {
    require_symmetric(*box, z.size());
    const boost::math::normal_distribution<double> normal(0.0, sigma);
    double shifted = 1.0;
    double centered = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      shifted *= boost::math::cdf(normal, z[i] + box->upper[i]) - boost::math::cdf(normal, z[i] + box->lower[i]);
      centered *= boost::math::cdf(normal, box->upper[i]) - boost::math::cdf(normal, box->lower[i]);
    }
    out.lhs = shifted;
    out.rhs = factor * centered;
    out.exact = true;
    out.holds = out.lhs >= out.rhs;
    return out;
  }

  const auto& poly = std::get<PolytopeSet>(set);
  require_symmetric(poly, z.size());
  const Fraction shifted = gaussian_fraction(poly, z, sigma, mc_samples, seed, Stream::shift_measure);
  const Fraction centered = gaussian_fraction(poly, Vector::Zero(z.size()), sigma, mc_samples, seed, Stream::measure_draws);
  out.lhs = shifted.mean;
  out.rhs = factor * centered.mean;
  out.std_error = std::hypot(shifted.std_error, factor * centered.std_error);
  out.holds = out.lhs >= out.rhs - 3.0 * out.std_error;
  return out;
}

PolytopeSet random_symmetric_polytope(int dimension, int pairs, std::uint64_t seed) {
  require(dimension >= 1 && pairs >= 1, "random_symmetric_polytope: dimension and pairs must be positive");
  PolytopeSet poly;
  poly.A.resize(2 * pairs, dimension);
  poly.b.resize(2 * pairs);
  for (int k = 0; k < pairs; ++k) {
    Rng rng = Rng::keyed(seed, Stream::targets, static_cast<std::uint64_t>(k));
    const Vector a = rng.normal_vector(dimension).normalized();
    const double b = 0.25 + 1.75 * rng.uniform();
    poly.A.row(2 * k) = a.transpose();
    poly.A.row(2 * k + 1) = -a.transpose();
    poly.b[2 * k] = b;
    poly.b[2 * k + 1] = b;
  }
  return poly;
}

}  // namespace fixpoint
