#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fixpoint/geometry.hpp"

namespace fixpoint {

struct VersionSpaceProbe {
  double diameter_lower_bound = 0.0;
  int directions_sampled = 0;
  int kernel_dimension = 0;
  Vector witness_first;  // empty when the kernel is trivial
  Vector witness_second;
  std::vector<double> direction_values;  // max <g_k, t> over ker(X) cap T, per direction
};

/// Orthonormal basis (columns) of ker(X), rank tolerance 1e-10 ||X||.
Matrix kernel_basis(const Matrix& X);

/// Lower bound on the diameter of ker(X) cap T: for k seeded gaussian
/// directions g, maximizes <g, t> over ker(X) cap T and returns twice the
/// largest maximizer norm, with the witnesses +/- that maximizer.
VersionSpaceProbe version_space_diameter(const ConvexBody& body, const Matrix& X, int directions, std::uint64_t seed);

enum class RichnessStatus { holds, violated, inconclusive };
std::string to_string(RichnessStatus status);

struct KernelRichnessReport {
  bool precondition_met = false;
  double log_packing = 0.0;  // ln M(T cap 2rB, (r/4)B), greedy lower bound
  double required = 0.0;     // c N
  double threshold = 0.0;    // r / 8
  double fraction_holding = 0.0;
  std::vector<double> diameters;
  RichnessStatus status = RichnessStatus::inconclusive;
};

/// If ln M(T cap 2rB, (r/4)B) >= cN, then ker(X) cap T should have diameter
/// at least r/8 for random N x n designs. Reports the fraction of trials in
/// which the diameter bound holds; when the packing precondition is not met
/// the status is inconclusive.
KernelRichnessReport kernel_richness_check(const ClassSpec& cls, double r, int N, double c, int pool_size, int trials,
                                           std::uint64_t seed, int directions = 64);

/// Axis-aligned box [lower, upper]; symmetric iff lower = -upper.
struct BoxSet {
  Vector lower;
  Vector upper;
};

/// {x : A x <= b}; symmetric iff its rows come in (a, b), (-a, b) pairs.
struct PolytopeSet {
  Matrix A;
  Vector b;
};

using ShiftSet = std::variant<BoxSet, PolytopeSet>;

struct ShiftCheck {
  double lhs = 0.0;  // nu(z + A)
  double rhs = 0.0;  // exp(-|z|^2 / 2 sigma^2) nu(A)
  double std_error = 0.0;
  bool exact = false;
  bool holds = false;
};

/// nu = N(0, sigma^2 I). Boxes use exact normal CDF products; polytopes use
/// Monte Carlo with independent draws for the two measures, and the check
/// holds iff lhs >= rhs - 3 standard errors.
ShiftCheck gaussian_shift_check(const ShiftSet& set, const Vector& z, double sigma, int mc_samples,
                                std::uint64_t seed);

/// Symmetric polytope with `pairs` random facet pairs |<a_k, x>| <= b_k.
PolytopeSet random_symmetric_polytope(int dimension, int pairs, std::uint64_t seed);

}  // namespace fixpoint
