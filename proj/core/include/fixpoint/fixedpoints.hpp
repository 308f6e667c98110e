#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fixpoint/geometry.hpp"

namespace fixpoint {

/// r_M:     E||G||_{(T-f) cap sB} <= constant * s^2 sqrt(N)
/// r_Q:     E||G||_{(T-f) cap sB} <= constant * s sqrt(N)
/// gamma_M: ln M((T-f) cap 4sB, (s/2)B) <= constant^2 s^2 N
/// gamma_Q: ln M((T-f) cap 4sB, (s/2)B) <= constant^2 N
enum class FixedPointKind { r_M, r_Q, gamma_M, gamma_Q };

std::string to_string(FixedPointKind kind);
FixedPointKind fixed_point_kind_from_string(const std::string& name);

struct GridConfig {
  int points = 48;
  int refine_steps = 10;
  double min_fraction = 0x1.0p-20;  // grid minimum relative to the top scale
  int mc_samples = 512;
  int pool_size = 4096;
};

struct CurvePoint {
  int shift_index = 0;
  double scale = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct FixedPointResult {
  FixedPointKind kind = FixedPointKind::r_M;
  double constant = 1.0;
  int sample_size = 1;
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool floored = false;     // holds on the whole grid; value is the grid minimum
  bool unresolved = false;  // fails at the top of the grid; value is the top
  bool noisy = false;       // some cell below the last failing cell holds
  int critical_shift = 0;   // index of the shift attaining the sup
  std::vector<CurvePoint> curve;
  std::vector<Vector> shifts_probed;
};

/// Log-spaced scales from top * min_fraction to top, where top is the
/// circumradius of the body.
std::vector<double> scale_grid(const ConvexBody& body, const GridConfig& grid);

/// The origin followed by `count` seeded boundary points.
std::vector<Vector> default_shifts(const ConvexBody& body, int count, std::uint64_t seed);

/// Evaluates the defining inequality along the grid for every shift, bisects
/// between the last failing and the next grid cell, and returns the sup over
/// shifts. The same Monte Carlo draws (or pool) are used at every scale of a
/// given shift.
FixedPointResult solve_fixed_point(FixedPointKind kind, const ClassSpec& cls, int N, double constant,
                                   const std::vector<Vector>& shifts, const GridConfig& grid, std::uint64_t seed);

/// Closed forms for T = R B_2^n, with ln 16 as the packing-rate constant.
double ball_oracle(FixedPointKind kind, int n, int N, double constant, double R);

}  // namespace fixpoint
