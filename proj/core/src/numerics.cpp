#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include "fixpoint/error.hpp"
#include "fixpoint/random.hpp"
#include "internal.hpp"

namespace fixpoint::detail {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  Rng rng = Rng::keyed(seed, Stream::trials, tag);
  return rng();
}

double lp_norm(const Vector& x, double p) {
  if (std::isinf(p)) return x.lpNorm<Eigen::Infinity>();
  if (p == 1.0) return x.lpNorm<1>();
  if (p == 2.0) return x.norm();
  const double scale = x.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return 0.0;
  return scale * std::pow((x.array().abs() / scale).pow(p).sum(), 1.0 / p);
}

Bracket solve_monotone(const std::function<double(double)>& f, double lo, double hi, double f_lo, double f_hi,
                       int max_iterations) {
  if (f_lo == 0.0) return {lo, lo};
  if (f_hi == 0.0) return {hi, hi};
  // Rounding can push an end that should straddle the root to the wrong side.
  if ((f_lo > 0.0) == (f_hi > 0.0)) return std::abs(f_lo) <= std::abs(f_hi) ? Bracket{lo, lo} : Bracket{hi, hi};
  auto close_enough = [](double a, double b) {
    return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
  };
  boost::uintmax_t iterations = static_cast<boost::uintmax_t>(max_iterations);
  auto result = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, close_enough, iterations);
  return {result.first, result.second};
}

namespace {

// Duchi et al. sort-based projection onto the unit l1 ball.
Vector project_unit_l1(const Vector& y) {
  Eigen::ArrayXd a = y.array().abs();
  std::vector<double> sorted(a.data(), a.data() + a.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  Eigen::ArrayXd u = (a - theta).max(0.0);
  return (y.array().sign() * u).matrix();
}

// For 1 < p < 2 solve u + lambda p u^{p-1} = a per coordinate in the variable
// w = u^{p-1}: h(w) = w^k + lambda p w - a with k = 1/(p-1) > 1 is convex and
// increasing, so Newton from an upper bound descends monotonically onto the
// root. For p > 2 the same holds for h(u) = u + lambda p u^{p-1} - a directly.
Eigen::ArrayXd lp_coordinate_solve(const Eigen::ArrayXd& a, double p, double lambda) {
  if (lambda == 0.0) return a;
  const double lp = lambda * p;
  if (p < 2.0) {
    const double k = 1.0 / (p - 1.0);
    Eigen::ArrayXd w = (a.pow(p - 1.0)).min(a / lp);
    for (int it = 0; it < 400; ++it) {
      Eigen::ArrayXd wk = (k * w.log()).exp();
      Eigen::ArrayXd h = wk + lp * w - a;
      Eigen::ArrayXd dh = k * wk / w + lp;
      Eigen::ArrayXd step = (h / dh).max(0.0);
      w -= step;
      if ((step <= 1e-15 * w).all()) break;
    }
    return (k * w.log()).exp();
  }
  Eigen::ArrayXd u = a.min((a / lp).pow(1.0 / (p - 1.0)));
  for (int it = 0; it < 400; ++it) {
    Eigen::ArrayXd upm1 = u.pow(p - 1.0);
    Eigen::ArrayXd h = u + lp * upm1 - a;
    Eigen::ArrayXd dh = 1.0 + lp * (p - 1.0) * upm1 / u;
    Eigen::ArrayXd step = (h / dh).max(0.0);
    u -= step;
    if ((step <= 1e-15 * u).all()) break;
  }
  return u;
}

}  // namespace

Vector project_unit_lp(const Vector& y, double p) {
  if (lp_norm(y, p) <= 1.0) return y;
  if (p == 2.0) return y / y.norm();
  if (std::isinf(p)) return y.cwiseMax(-1.0).cwiseMin(1.0);
  if (p == 1.0) return project_unit_l1(y);

  // Only nonzero coordinates take part in the multiplier search.
  std::vector<Eigen::Index> support_index;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) support_index.push_back(i);
  Eigen::ArrayXd a(static_cast<Eigen::Index>(support_index.size()));
  for (std::size_t j = 0; j < support_index.size(); ++j) a[j] = std::abs(y[support_index[j]]);

  auto excess = [&](double lambda) { return lp_coordinate_solve(a, p, lambda).pow(p).sum() - 1.0; };
  const double q = p / (p - 1.0);
  const double lambda_hi = std::pow(a.pow(q).sum(), 1.0 / q) / p;
  const Bracket bracket = solve_monotone(excess, 0.0, lambda_hi, excess(0.0), excess(lambda_hi));

  Eigen::ArrayXd u = lp_coordinate_solve(a, p, bracket.hi);
  const double norm = std::pow(u.pow(p).sum(), 1.0 / p);
  if (norm > 1.0) u /= norm;

  Vector out = Vector::Zero(y.size());
  for (std::size_t j = 0; j < support_index.size(); ++j)
    out[support_index[j]] = std::copysign(u[static_cast<Eigen::Index>(j)], y[support_index[j]]);
  return out;
}

Vector min_norm_point(const Matrix& points, double tol) {
  const Eigen::Index m = points.cols();
  const Eigen::VectorXd sq = points.colwise().squaredNorm().transpose();
  const double scale = std::max(sq.maxCoeff(), std::numeric_limits<double>::min());
  const double gap_tol = std::max(tol * tol, 1e-15 * scale);
  const double weight_eps = 1e-12;

  Eigen::Index first = 0;
  sq.minCoeff(&first);
  std::vector<Eigen::Index> active{first};
  std::vector<double> weights{1.0};
  Vector x = points.col(first);

  auto combine = [&] {
    Vector y = Vector::Zero(points.rows());
    for (std::size_t i = 0; i < active.size(); ++i) y += weights[i] * points.col(active[i]);
    return y;
  };

  const int max_major = static_cast<int>(10 * m + 100);
  double previous = std::numeric_limits<double>::infinity();
  for (int major = 0; major < max_major; ++major) {
    const double norm_sq = x.squaredNorm();
    // Stalls only happen in degenerate configurations, once x is optimal to
    // rounding.
    if (norm_sq <= 1e-30 * scale || norm_sq >= previous * (1.0 - 1e-14)) return x;
    previous = norm_sq;
    const Eigen::VectorXd dots = points.transpose() * x;
    Eigen::Index entering = 0;
    dots.minCoeff(&entering);
    if (norm_sq - dots[entering] <= gap_tol) return x;
    if (std::find(active.begin(), active.end(), entering) != active.end()) return x;
    active.push_back(entering);
    weights.push_back(0.0);

    for (int minor = 0; minor <= static_cast<int>(points.rows()) + 2; ++minor) {
      // Affine minimizer of the active points: min |B alpha| with sum alpha = 1.
      const auto k = static_cast<Eigen::Index>(active.size());
      Matrix basis(points.rows(), k);
      for (Eigen::Index i = 0; i < k; ++i) basis.col(i) = points.col(active[static_cast<std::size_t>(i)]);
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      kkt.topLeftCorner(k, k) = basis.transpose() * basis;
      kkt.block(0, k, k, 1).setOnes();
      kkt.block(k, 0, 1, k).setOnes();
      Vector rhs = Vector::Zero(k + 1);
      rhs[k] = 1.0;
      const Vector alpha = kkt.completeOrthogonalDecomposition().solve(rhs).head(k);

      if ((alpha.array() > weight_eps).all()) {
        for (Eigen::Index i = 0; i < k; ++i) weights[static_cast<std::size_t>(i)] = alpha[i];
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double w = weights[static_cast<std::size_t>(i)];
        if (alpha[i] <= weight_eps && w - alpha[i] > 0.0) theta = std::min(theta, w / (w - alpha[i]));
      }
      for (Eigen::Index i = 0; i < k; ++i) {
        auto& w = weights[static_cast<std::size_t>(i)];
        w = theta * alpha[i] + (1.0 - theta) * w;
      }
      std::vector<Eigen::Index> kept_index;
      std::vector<double> kept_weight;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (weights[i] > weight_eps) {
          kept_index.push_back(active[i]);
          kept_weight.push_back(weights[i]);
        }
      }
      if (kept_index.empty()) {
        kept_index.push_back(entering);
        kept_weight.push_back(1.0);
      }
      const double total = std::accumulate(kept_weight.begin(), kept_weight.end(), 0.0);
      for (auto& w : kept_weight) w /= total;
      active = std::move(kept_index);
      weights = std::move(kept_weight);
    }
    x = combine();
  }
  throw ConvergenceError("min_norm_point: iteration budget exhausted", x, x.squaredNorm());
}

}  // namespace fixpoint::detail
