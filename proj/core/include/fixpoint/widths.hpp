#pragma once

#include <cstdint>

#include "fixpoint/geometry.hpp"

namespace fixpoint {

/// Monte Carlo estimate of E sup_{t in T, |t - shift| <= s} <g, t - shift>.
struct WidthEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int mc_samples = 0;
  double scale = 0.0;
  Vector shift;
};

/// Mean of linmax(body, shift, s, g) over mc_samples standard gaussian g.
/// Draw k uses the generator keyed by (seed, width_draws, k), so the result
/// does not depend on the worker count. Fails if more than 1% of draws fail.
WidthEstimate estimate_width(const ClassSpec& cls, const Vector& shift, double s, int mc_samples, std::uint64_t seed);

/// Constant-free order of E||G|| over B_p^n intersected with r B_2^n for
/// 1 < p < 2: n^{1-1/p} above the threshold r = n^{-(1/p-1/2)}, r n^{1/2}
/// below it.
double lp_width_order(int n, double p, double r);

/// E|g|_2 for a standard gaussian vector in R^n.
double chi_mean(int n);

}  // namespace fixpoint
