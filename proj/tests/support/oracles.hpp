#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Vector = Eigen::VectorXd;

/// E|g|_2 for g ~ N(0, I_n) via lgamma.
inline double chi_mean(int n) {
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (n + 1)) - std::lgamma(0.5 * n));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// E|g|^{2k} = (2k-1)!!.
inline double gaussian_even_moment(int k) {
  double out = 1.0;
  for (int j = 1; j <= k; ++j) out *= 2.0 * j - 1.0;
  return out;
}

/// max <g, t> over the unit l_p ball in R^2 by a fine polar grid of its boundary.
inline double support_lp2_grid(double p, double g1, double g2, int steps = 200000) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < steps; ++k) {
    const double a = 2.0 * std::numbers::pi * k / steps;
    const double c = std::cos(a), s = std::sin(a);
    const double norm = std::pow(std::pow(std::abs(c), p) + std::pow(std::abs(s), p), 1.0 / p);
    best = std::max(best, (g1 * c + g2 * s) / norm);
  }
  return best;
}

/// Projection onto the unit l1 ball by bisection on the soft threshold.
inline Vector project_l1_soft_threshold(const Vector& y) {
  if (y.lpNorm<1>() <= 1.0) return y;
  double lo = 0.0, hi = y.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (y.cwiseAbs().array() - mid).max(0.0).sum();
    (mass > 1.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  return (y.array().sign() * (y.cwiseAbs().array() - theta).max(0.0)).matrix();
}

/// max <g, t - c> over T cap B(c, s) for T given by a 2-D membership test,
/// by a dense polar grid over the disc around c.
inline double linmax_2d_grid(const std::function<bool(double, double)>& member, double cx, double cy, double s,
                             double g1, double g2, int radial = 2000, int angular = 4000) {
  double best = 0.0;
  for (int i = 1; i <= radial; ++i) {
    const double rho = s * i / radial;
    for (int k = 0; k < angular; ++k) {
      const double a = 2.0 * std::numbers::pi * k / angular;
      const double x = cx + rho * std::cos(a), y = cy + rho * std::sin(a);
      if (member(x, y)) best = std::max(best, g1 * (x - cx) + g2 * (y - cy));
    }
  }
  return best;
}

/// Largest separated subset of a small point set by exhaustive enumeration.
inline int max_packing(const std::vector<Vector>& points, double separation) {
  const auto m = static_cast<unsigned>(points.size());
  int best = m == 0 ? 0 : 1;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size <= best) continue;
    bool ok = true;
    for (unsigned i = 0; i < m && ok; ++i)
      for (unsigned j = i + 1; j < m && ok; ++j)
        if ((mask >> i & 1u) && (mask >> j & 1u) && (points[i] - points[j]).norm() < separation) ok = false;
    if (ok) best = size;
  }
  return best;
}

/// Smallest number of input points whose closed radius-balls cover all inputs,
/// by breadth-first search over subset sizes.
inline int min_cover(const std::vector<Vector>& points, double radius) {
  const auto m = static_cast<unsigned>(points.size());
  for (unsigned k = 1; k <= m; ++k) {
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
      bool covered = true;
      for (unsigned j = 0; j < m && covered; ++j) {
        bool hit = false;
        for (unsigned i = 0; i < m && !hit; ++i) hit = pick[i] && (points[i] - points[j]).norm() <= radius;
        covered = hit;
      }
      if (covered) return static_cast<int>(k);
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return static_cast<int>(m);
}

}  // namespace oracle
