#pragma once

// Helpers shared between translation units of the core library.

#include <cstdint>
#include <functional>

#include "fixpoint/geometry.hpp"

namespace fixpoint::detail {

/// Projection onto the unit l_p ball (1 <= p <= inf).
Vector project_unit_lp(const Vector& y, double p);

/// Minimum-norm point of the convex hull of the columns of `points`
/// (Wolfe's algorithm).
Vector min_norm_point(const Matrix& points, double tol);

/// Projection onto T intersected with the column span of an orthonormal
/// basis (Dykstra's alternating projections).
Vector project_subspace_intersection(const ConvexBody& body, const Matrix& basis, const Vector& x);

double lp_norm(const Vector& x, double p);

/// Root of a continuous monotone function on [lo, hi] (lo < hi) given f(lo),
/// f(hi) of opposite signs (TOMS 748). Returns the final bracket so callers
/// can pick the end that is feasible for them.
struct Bracket {
  double lo;
  double hi;
};
Bracket solve_monotone(const std::function<double(double)>& f, double lo, double hi, double f_lo, double f_hi,
                       int max_iterations = 200);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace fixpoint::detail
