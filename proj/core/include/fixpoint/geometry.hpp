#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace fixpoint {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A symmetric compact convex body T in R^n. The function class it indexes
/// is {<t, .> : t in T}. Bodies are immutable and cheap to copy (shared
/// representation).
class ConvexBody {
 public:
  struct Node;

  /// {x : ||x||_p <= radius}. p = +infinity is allowed.
  static ConvexBody lp_ball(int n, double p, double radius = 1.0);
  /// {x : sum (x_i / a_i)^2 <= 1}.
  static ConvexBody ellipsoid(Vector semiaxes);
  /// Convex hull of +/- the given vertices. n <= 16, at most 4096 vertices.
  static ConvexBody polytope(const std::vector<Vector>& vertices);
  static ConvexBody scaled(ConvexBody inner, double factor);
  static ConvexBody intersection(ConvexBody first, ConvexBody second);

  int dimension() const noexcept { return dimension_; }

  /// Euclidean circumradius max |t|_2. Exact for every variant except
  /// Intersection, where min of the two radii is reported (an upper bound).
  double radius() const noexcept { return radius_; }
  double diameter() const noexcept { return 2.0 * radius_; }

  /// Default membership tolerance: 1e-9 * (1 + radius).
  double tolerance() const noexcept { return 1e-9 * (1.0 + radius_); }

  const Node& node() const noexcept { return *node_; }

 private:
  ConvexBody(std::shared_ptr<const Node> node, int dimension, double radius);

  std::shared_ptr<const Node> node_;
  int dimension_ = 0;
  double radius_ = 0.0;
};

struct LpBall {
  int n;
  double p;
  double radius;
};

struct Ellipsoid {
  Vector semiaxes;
};

struct Polytope {
  Matrix vertices;  // n x m, original (unsymmetrized) vertices as columns
  Matrix hull;      // n x 2m, vertices followed by their negations
};

struct Scaled {
  ConvexBody inner;
  double factor;
};

struct Intersection {
  ConvexBody first;
  ConvexBody second;
};

struct ConvexBody::Node {
  std::variant<LpBall, Ellipsoid, Polytope, Scaled, Intersection> shape;
};

enum class DesignLaw { gaussian, rademacher };

/// The isotropic design measure mu on R^n together with the index body.
/// Under an isotropic law ||<t,.> - <s,.>||_{L2(mu)} = |t - s|_2.
struct ClassSpec {
  ConvexBody body;
  DesignLaw design = DesignLaw::gaussian;
  double subgaussian_constant = 1.0;
};

std::string to_string(DesignLaw law);
DesignLaw design_law_from_string(const std::string& name);

/// Minkowski gauge inf{lambda > 0 : x in lambda T}.
double gauge(const ConvexBody& body, const Vector& x);

/// Membership within tol (defaults to body.tolerance()).
bool contains(const ConvexBody& body, const Vector& x, double tol = -1.0);

/// max_{t in T} <g, t>.
double support(const ConvexBody& body, const Vector& g);

/// A maximizer of <g, t> over T, when a closed form exists (every variant
/// except Intersection). Lowest coordinate index wins ties.
bool support_point(const ConvexBody& body, const Vector& g, Vector& out);

/// Euclidean projection onto T. Iterative variants stop at tol; Intersection
/// uses Dykstra's alternating projections with a 10,000 iteration cap.
Vector project(const ConvexBody& body, const Vector& x, double tol = 1e-12);

/// Euclidean projection onto T intersected with the ball |t - center| <= radius,
/// computed through the one-dimensional Lagrangian dual of the ball
/// constraint. center must lie in T.
Vector project_localized(const ConvexBody& body, const Vector& center, double radius, const Vector& x,
                         double tol = 1e-12);

/// Dykstra's alternating projections onto T and a Euclidean ball, the
/// general-purpose route for intersections.
Vector project_dykstra_ball(const ConvexBody& body, const Vector& center, double radius, const Vector& x,
                            double tol = 1e-12);

enum class LinmaxMethod {
  lagrangian,          // exact dual search on the ball multiplier
  projected_gradient,  // projected ascent with Dykstra projections
};

struct LinmaxResult {
  double value = 0.0;  // max <g, t - center>
  Vector argmax;       // the maximizing t (absolute coordinates)
};

/// max <g, t - center> over t in T with |t - center|_2 <= s.
LinmaxResult linmax(const ConvexBody& body, const Vector& center, double s, const Vector& g,
                    LinmaxMethod method = LinmaxMethod::lagrangian);

enum class SampleMode { boundary, interior, mixed };

SampleMode sample_mode_from_string(const std::string& name);

/// Seeded members of T. Point i depends only on (seed, i). In mixed mode odd
/// indices are boundary points and even indices interior points.
std::vector<Vector> sample_points(const ConvexBody& body, int count, SampleMode mode, std::uint64_t seed);

/// One row of the design law.
Vector sample_design_row(DesignLaw law, int n, std::uint64_t seed, std::uint64_t index);

struct SubgaussianMoment {
  double p = 2.0;
  double max_ratio = 0.0;   // L-hat: max over pairs
  double mean_ratio = 0.0;  // average over pairs
  double std_error = 0.0;   // delta-method standard error at the maximizing pair
};

/// Empirical check of ||f - h||_{Lp} <= L sqrt(p) ||f - h||_{L2} on random
/// pairs from T together with the origin. Returns, per moment p, the ratio
/// ||<t-s,X>||_p / (sqrt(p) ||<t-s,X>||_2) estimated from mc_samples draws.
std::vector<SubgaussianMoment> check_subgaussian(const ClassSpec& cls, int pair_count, const std::vector<double>& moments,
                                                 int mc_samples, std::uint64_t seed);

/// Moment ratio for an explicit difference vector; exposed for tests.
SubgaussianMoment subgaussian_ratio(DesignLaw law, const Vector& difference, double p, int mc_samples,
                                    std::uint64_t seed, std::uint64_t pair_index = 0);

}  // namespace fixpoint
