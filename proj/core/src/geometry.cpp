#include "fixpoint/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fixpoint/error.hpp"
#include "fixpoint/random.hpp"
#include "internal.hpp"

namespace fixpoint {

using detail::require;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kDykstraIterations = 10'000;
constexpr double kDykstraRelativeTol = 1e-10;

bool finite(const Vector& x) { return x.allFinite(); }

void require_dimension(const ConvexBody& body, const Vector& x, const char* what) {
  require(x.size() == body.dimension(),
          std::string(what) + ": vector has dimension " + std::to_string(x.size()) + ", body has " +
              std::to_string(body.dimension()));
  require(finite(x), std::string(what) + ": non-finite input");
}

double dual_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

// Dykstra's alternating projections for two closed convex sets.
template <class ProjectA, class ProjectB>
Vector dykstra(const Vector& start, ProjectA&& project_a, ProjectB&& project_b, double scale) {
  const double threshold = kDykstraRelativeTol * std::max(scale, std::numeric_limits<double>::min()) +
                           16.0 * std::numeric_limits<double>::epsilon() * start.norm();
  Vector x = start;
  Vector p = Vector::Zero(start.size());
  Vector q = Vector::Zero(start.size());
  double move = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kDykstraIterations; ++it) {
    const Vector y = project_a(x + p);
    p = x + p - y;
    Vector next = project_b(y + q);
    q = y + q - next;
    move = (next - x).norm();
    x = std::move(next);
    if (move < threshold) return x;
  }
  throw ConvergenceError("dykstra: no convergence within 10000 iterations", x, move);
}

Vector project_polytope(const Polytope& poly, const Vector& x, double tol) {
  const Matrix shifted = poly.hull.colwise() - x;
  return x + detail::min_norm_point(shifted, tol);
}

double polytope_distance(const Polytope& poly, const Vector& x) {
  return (project_polytope(poly, x, 1e-13) - x).norm();
}

double polytope_gauge(const Polytope& poly, const Vector& x) {
  if (x.norm() == 0.0) return 0.0;
  const double tol = 1e-12 * (1.0 + poly.hull.colwise().norm().maxCoeff());
  auto inside = [&](double lambda) { return polytope_distance(poly, x / lambda) <= tol; };
  double hi = 1.0;
  while (!inside(hi)) hi *= 2.0;
  double lo = hi;
  while (lo > 1e-300 && inside(lo)) lo *= 0.5;
  for (int it = 0; it < 64 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

Vector project_ellipsoid(const Ellipsoid& e, const Vector& x) {
  const Eigen::ArrayXd a2 = e.semiaxes.array().square();
  const Eigen::ArrayXd ax = e.semiaxes.array() * x.array();
  auto excess = [&](double lambda) { return (ax / (a2 + lambda)).square().sum() - 1.0; };
  const double f0 = excess(0.0);
  if (f0 <= 0.0) return x;
  const double hi = std::sqrt(ax.square().sum());
  const auto bracket = detail::solve_monotone(excess, 0.0, hi, f0, excess(hi));
  Vector out = (a2 * x.array() / (a2 + bracket.hi)).matrix();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

ConvexBody::ConvexBody(std::shared_ptr<const Node> node, int dimension, double radius)
    : node_(std::move(node)), dimension_(dimension), radius_(radius) {}

ConvexBody ConvexBody::lp_ball(int n, double p, double radius) {
  require(n >= 1, "lp_ball: dimension must be positive");
  require(p >= 1.0, "lp_ball: exponent p must lie in [1, inf]");
  require(radius > 0.0 && std::isfinite(radius), "lp_ball: radius must be positive and finite");
  double circumradius = radius;
  if (std::isinf(p))
    circumradius = radius * std::sqrt(static_cast<double>(n));
  else if (p > 2.0)
    circumradius = radius * std::pow(static_cast<double>(n), 0.5 - 1.0 / p);
  auto node = std::make_shared<Node>(Node{LpBall{n, p, radius}});
  return ConvexBody(std::move(node), n, circumradius);
}

ConvexBody ConvexBody::ellipsoid(Vector semiaxes) {
  require(semiaxes.size() >= 1, "ellipsoid: need at least one semiaxis");
  require(semiaxes.allFinite() && (semiaxes.array() > 0.0).all(), "ellipsoid: semiaxes must be positive");
  const double r = semiaxes.maxCoeff();
  const int n = static_cast<int>(semiaxes.size());
  return ConvexBody(std::make_shared<Node>(Node{Ellipsoid{std::move(semiaxes)}}), n, r);
}

ConvexBody ConvexBody::polytope(const std::vector<Vector>& vertices) {
  require(!vertices.empty(), "polytope: need at least one vertex");
  require(vertices.size() <= 4096, "polytope: at most 4096 vertices supported");
  const auto n = vertices.front().size();
  require(n >= 1 && n <= 16, "polytope: dimension must be in [1, 16]");
  Matrix v(n, static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    require(vertices[j].size() == n, "polytope: vertices must share one dimension");
    require(vertices[j].allFinite(), "polytope: non-finite vertex");
    v.col(static_cast<Eigen::Index>(j)) = vertices[j];
  }
  Matrix hull(n, 2 * v.cols());
  hull << v, -v;
  const double r = v.colwise().norm().maxCoeff();
  require(r > 0.0, "polytope: all vertices are zero");
  return ConvexBody(std::make_shared<Node>(Node{Polytope{std::move(v), std::move(hull)}}), static_cast<int>(n), r);
}

ConvexBody ConvexBody::scaled(ConvexBody inner, double factor) {
  require(factor > 0.0 && std::isfinite(factor), "scaled: factor must be positive");
  const int n = inner.dimension();
  const double r = factor * inner.radius();
  return ConvexBody(std::make_shared<Node>(Node{Scaled{std::move(inner), factor}}), n, r);
}

ConvexBody ConvexBody::intersection(ConvexBody first, ConvexBody second) {
  require(first.dimension() == second.dimension(), "intersection: bodies must share one dimension");
  const int n = first.dimension();
  const double r = std::min(first.radius(), second.radius());
  return ConvexBody(std::make_shared<Node>(Node{Intersection{std::move(first), std::move(second)}}), n, r);
}

std::string to_string(DesignLaw law) { return law == DesignLaw::gaussian ? "gaussian" : "rademacher"; }

DesignLaw design_law_from_string(const std::string& name) {
  if (name == "gaussian") return DesignLaw::gaussian;
  if (name == "rademacher") return DesignLaw::rademacher;
  throw InvalidArgument("unknown design law '" + name + "' (expected gaussian or rademacher)");
}

SampleMode sample_mode_from_string(const std::string& name) {
  if (name == "boundary") return SampleMode::boundary;
  if (name == "interior") return SampleMode::interior;
  if (name == "mixed") return SampleMode::mixed;
  throw InvalidArgument("unknown sample mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Gauge, membership, support

double gauge(const ConvexBody& body, const Vector& x) {
  return std::visit(Overloaded{
                        [&](const LpBall& b) { return detail::lp_norm(x, b.p) / b.radius; },
                        [&](const Ellipsoid& e) { return (x.array() / e.semiaxes.array()).matrix().norm(); },
                        [&](const Polytope& poly) { return polytope_gauge(poly, x); },
                        [&](const Scaled& s) { return gauge(s.inner, x / s.factor); },
                        [&](const Intersection& i) { return std::max(gauge(i.first, x), gauge(i.second, x)); },
                    },
                    body.node().shape);
}

bool contains(const ConvexBody& body, const Vector& x, double tol) {
  if (tol < 0.0) tol = body.tolerance();
  if (x.size() != body.dimension() || !finite(x)) return false;
  return std::visit(Overloaded{
                        [&](const Polytope& poly) { return polytope_distance(poly, x) <= tol; },
                        [&](const Intersection& i) { return contains(i.first, x, tol) && contains(i.second, x, tol); },
                        [&](const auto&) {
                          // x / gauge(x) is a member, so |x| (1 - 1/gauge) bounds the distance to T.
                          const double g = gauge(body, x);
                          return g <= 1.0 || x.norm() * (1.0 - 1.0 / g) <= tol;
                        },
                    },
                    body.node().shape);
}

double support(const ConvexBody& body, const Vector& g) {
  require_dimension(body, g, "support");
  return std::visit(Overloaded{
                        [&](const LpBall& b) { return b.radius * detail::lp_norm(g, dual_exponent(b.p)); },
                        [&](const Ellipsoid& e) { return (e.semiaxes.array() * g.array()).matrix().norm(); },
                        [&](const Polytope& poly) { return (poly.vertices.transpose() * g).cwiseAbs().maxCoeff(); },
                        [&](const Scaled& s) { return s.factor * support(s.inner, g); },
                        [&](const Intersection&) {
                          return linmax(body, Vector::Zero(g.size()), body.radius(), g).value;
                        },
                    },
                    body.node().shape);
}

bool support_point(const ConvexBody& body, const Vector& g, Vector& out) {
  const auto n = g.size();
  if (g.isZero(0.0)) {
    out = Vector::Zero(n);
    return true;
  }
  return std::visit(
      Overloaded{
          [&](const LpBall& b) {
            if (b.p == 1.0) {
              Eigen::Index k = 0;
              g.cwiseAbs().maxCoeff(&k);
              out = Vector::Zero(n);
              out[k] = std::copysign(b.radius, g[k]);
            } else if (std::isinf(b.p)) {
              out = b.radius * g.array().sign().matrix();
            } else if (b.p == 2.0) {
              out = b.radius * g / g.norm();
            } else {
              const double q = dual_exponent(b.p);
              const double norm_q = detail::lp_norm(g, q);
              out = (b.radius * g.array().sign() * (g.array().abs() / norm_q).pow(q - 1.0)).matrix();
            }
            return true;
          },
          [&](const Ellipsoid& e) {
            const Eigen::ArrayXd a2g = e.semiaxes.array().square() * g.array();
            out = (a2g / (e.semiaxes.array() * g.array()).matrix().norm()).matrix();
            return true;
          },
          [&](const Polytope& poly) {
            Eigen::Index k = 0;
            (poly.hull.transpose() * g).maxCoeff(&k);
            out = poly.hull.col(k);
            return true;
          },
          [&](const Scaled& s) {
            if (!support_point(s.inner, g, out)) return false;
            out *= s.factor;
            return true;
          },
          [&](const Intersection&) { return false; },
      },
      body.node().shape);
}

// ---------------------------------------------------------------------------
// Projections

Vector project(const ConvexBody& body, const Vector& x, double tol) {
  require_dimension(body, x, "project");
  require(tol > 0.0, "project: tol must be positive");
  return std::visit(
      Overloaded{
          [&](const LpBall& b) -> Vector { return b.radius * detail::project_unit_lp(x / b.radius, b.p); },
          [&](const Ellipsoid& e) -> Vector { return project_ellipsoid(e, x); },
          [&](const Polytope& poly) -> Vector {
            if (polytope_distance(poly, x) <= tol) return x;
            return project_polytope(poly, x, tol);
          },
          [&](const Scaled& s) -> Vector { return s.factor * project(s.inner, x / s.factor, tol / s.factor); },
          [&](const Intersection& i) -> Vector {
            if (contains(i.first, x, tol) && contains(i.second, x, tol)) return x;
            return dykstra(
                x, [&](const Vector& v) { return project(i.first, v, tol); },
                [&](const Vector& v) { return project(i.second, v, tol); }, body.diameter());
          },
      },
      body.node().shape);
}

Vector project_localized(const ConvexBody& body, const Vector& center, double radius, const Vector& x, double tol) {
  require_dimension(body, x, "project_localized");
  require(radius > 0.0, "project_localized: radius must be positive");
  const Vector direct = project(body, x, tol);
  if ((direct - center).norm() <= radius) return direct;

  // Minimizing |z - x|^2 + mu (|z - c|^2 - radius^2) over T gives
  // z = P_T(c + tau (x - c)) with tau = 1/(1 + mu); |z - c| is nondecreasing
  // in tau and at most tau |x - c|.
  const Vector v = x - center;
  auto excess = [&](double tau) { return (project(body, center + tau * v, tol) - center).norm() - radius; };
  const double tau_lo = radius / v.norm();
  const double f_lo = excess(tau_lo);
  const double f_hi = (direct - center).norm() - radius;
  const auto bracket = detail::solve_monotone(excess, tau_lo, 1.0, f_lo, f_hi);
  Vector z = project(body, center + bracket.lo * v, tol);
  const double d = (z - center).norm();
  if (d > radius) z = center + (z - center) * (radius / d);
  return z;
}

Vector project_dykstra_ball(const ConvexBody& body, const Vector& center, double radius, const Vector& x, double tol) {
  require_dimension(body, x, "project_dykstra_ball");
  auto onto_ball = [&](const Vector& v) -> Vector {
    const Vector d = v - center;
    const double norm = d.norm();
    return norm <= radius ? v : Vector(center + d * (radius / norm));
  };
  return dykstra(
      x, [&](const Vector& v) { return project(body, v, tol); }, onto_ball, std::min(body.diameter(), 2.0 * radius));
}

Vector detail::project_subspace_intersection(const ConvexBody& body, const Matrix& basis, const Vector& x) {
  require_dimension(body, x, "project_subspace_intersection");
  auto onto_subspace = [&](const Vector& v) -> Vector { return basis * (basis.transpose() * v); };
  return dykstra(
      x, [&](const Vector& v) { return project(body, v); }, onto_subspace, body.diameter());
}

// ---------------------------------------------------------------------------
// Constrained linear maximization

namespace {

bool projects_by_dykstra(const ConvexBody& body) {
  if (std::holds_alternative<Intersection>(body.node().shape)) return true;
  if (const auto* scaled = std::get_if<Scaled>(&body.node().shape)) return projects_by_dykstra(scaled->inner);
  return false;
}

LinmaxResult linmax_lagrangian(const ConvexBody& body, const Vector& center, double s, const Vector& g) {
  const double g_norm = g.norm();

  // Ball constraint alone: its maximizer is feasible for T.
  Vector ball_point = center + (s / g_norm) * g;
  if (contains(body, ball_point, 0.0)) return {s * g_norm, std::move(ball_point)};

  // Body constraint alone: a support point inside the ball.
  Vector top;
  if (support_point(body, g, top) && (top - center).norm() <= s) return {g.dot(top - center), std::move(top)};

  // Otherwise both bind. For mu > 0 the maximizer of <g,t> - mu/2 |t-c|^2
  // over T is P_T(c + tau g) with tau = 1/mu, and |P_T(c + tau g) - c| is
  // nondecreasing in tau. Search tau with |t(tau) - c| = s.
  auto point_at = [&](double tau) { return project(body, center + tau * g); };
  auto excess = [&](double tau) { return (point_at(tau) - center).norm() - s; };
  const double tau_lo = s / g_norm;
  double tau_hi = tau_lo;
  double f_hi = excess(tau_hi);
  const double f_lo = f_hi;
  // Projections of far points are slow for Dykstra, so tau stays below a
  // moderate multiple of the problem scale.
  const double reach = body.diameter() + s + center.norm();
  const double tau_cap =
      projects_by_dykstra(body) ? 2.0 * reach / g_norm : std::numeric_limits<double>::infinity();
  for (int it = 0; it < 80 && f_hi <= 0.0 && tau_hi < tau_cap; ++it) {
    tau_hi *= 2.0;
    f_hi = excess(tau_hi);
  }
  Vector t;
  if (f_hi <= 0.0) {
    // Ball still inactive: proximal steps t <- P_T(t + tau g) climb to the
    // maximizing face of T.
    t = point_at(tau_hi);
    for (int it = 0; it < 500; ++it) {
      Vector next = project(body, t + tau_hi * g);
      const double move = (next - t).norm();
      t = std::move(next);
      if (move <= 1e-13 * reach) break;
    }
  } else if (f_lo >= 0.0) {
    t = point_at(tau_lo);
  } else {
    const auto bracket = detail::solve_monotone(excess, tau_hi * 0.5, tau_hi, excess(tau_hi * 0.5), f_hi);
    t = point_at(bracket.lo);
  }
  const double d = (t - center).norm();
  if (d > s) t = center + (t - center) * (s / d);
  return {g.dot(t - center), std::move(t)};
}

LinmaxResult linmax_projected_gradient(const ConvexBody& body, const Vector& center, double s, const Vector& g) {
  const double step = 0.5 * s / g.norm();
  Vector t = center;
  LinmaxResult best{0.0, center};
  for (int it = 0; it < 500; ++it) {
    t = project_dykstra_ball(body, center, s, t + step * g);
    const double value = g.dot(t - center);
    if (value > best.value) best = {value, t};
  }
  return best;
}

}  // namespace

LinmaxResult linmax(const ConvexBody& body, const Vector& center, double s, const Vector& g, LinmaxMethod method) {
  require_dimension(body, center, "linmax");
  require_dimension(body, g, "linmax");
  require(s > 0.0, "linmax: scale s must be positive");
  require(contains(body, center), "linmax: center does not lie in the body");
  if (g.isZero(0.0)) return {0.0, center};
  return method == LinmaxMethod::lagrangian ? linmax_lagrangian(body, center, s, g)
                                            : linmax_projected_gradient(body, center, s, g);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

Vector sample_interior(const ConvexBody& body, Rng& rng) {
  const int n = body.dimension();
  return std::visit(
      Overloaded{
          [&](const LpBall& b) -> Vector {
            Vector x(n);
            if (std::isinf(b.p)) {
              for (int i = 0; i < n; ++i) x[i] = b.radius * (2.0 * rng.uniform() - 1.0);
              return x;
            }
            // Coordinates with density proportional to exp(-|x|^p), divided by
            // an independent radial factor (sum |x_i|^p + E)^{1/p}, E ~ Exp(1),
            // are uniform on the unit l_p ball.
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
              const double magnitude_p = rng.gamma(1.0 / b.p);
              x[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(magnitude_p, 1.0 / b.p);
              total += magnitude_p;
            }
            total += rng.exponential();
            return x * (b.radius / std::pow(total, 1.0 / b.p));
          },
          [&](const Ellipsoid& e) -> Vector {
            Vector g = rng.normal_vector(n);
            const double r = std::pow(rng.uniform(), 1.0 / n);
            return (e.semiaxes.array() * g.array()).matrix() * (r / g.norm());
          },
          [&](const Polytope& poly) -> Vector {
            // Dirichlet(1) combination of n + 1 random hull vertices.
            Vector x = Vector::Zero(n);
            double total = 0.0;
            for (int k = 0; k <= n; ++k) {
              const auto j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(poly.hull.cols()));
              const double w = rng.exponential();
              x += w * poly.hull.col(j);
              total += w;
            }
            return x / total;
          },
          [&](const Scaled& s) -> Vector { return s.factor * sample_interior(s.inner, rng); },
          [&](const Intersection& i) -> Vector {
            Vector x = sample_interior(i.first, rng);
            const double g = gauge(i.second, x);
            return g > 1.0 ? Vector(x / g) : x;
          },
      },
      body.node().shape);
}

}  // namespace

std::vector<Vector> sample_points(const ConvexBody& body, int count, SampleMode mode, std::uint64_t seed) {
  require(count >= 0, "sample_points: count must be nonnegative");
  std::vector<Vector> points(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::keyed(seed, Stream::pool_points, static_cast<std::uint64_t>(i));
    Vector x = sample_interior(body, rng);
    const bool on_boundary = mode == SampleMode::boundary || (mode == SampleMode::mixed && i % 2 == 1);
    if (on_boundary) {
      double g = gauge(body, x);
      if (g == 0.0) {
        x = Vector::Unit(body.dimension(), 0);
        g = gauge(body, x);
      }
      x /= g;
    }
    points[static_cast<std::size_t>(i)] = std::move(x);
  }
  return points;
}

Vector sample_design_row(DesignLaw law, int n, std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::keyed(seed, Stream::design_rows, index);
  if (law == DesignLaw::gaussian) return rng.normal_vector(n);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = (rng() >> 63) != 0 ? 1.0 : -1.0;
  return x;
}

// ---------------------------------------------------------------------------
// Subgaussian moment check

SubgaussianMoment subgaussian_ratio(DesignLaw law, const Vector& difference, double p, int mc_samples,
                                    std::uint64_t seed, std::uint64_t pair_index) {
  require(p >= 2.0, "check_subgaussian: moments must be >= 2");
  require(mc_samples >= 2, "check_subgaussian: need at least two Monte Carlo samples");
  const auto m = static_cast<Eigen::Index>(mc_samples);
  Eigen::ArrayXd z(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vector x = sample_design_row(law, static_cast<int>(difference.size()), seed,
                                       (pair_index << 32) + static_cast<std::uint64_t>(k));
    z[k] = difference.dot(x);
  }
  const Eigen::ArrayXd a = z.abs().pow(p);
  const Eigen::ArrayXd b = z.square();
  const double mp = a.mean();
  const double m2 = b.mean();
  SubgaussianMoment out;
  out.p = p;
  if (m2 == 0.0) return out;
  const double ratio = std::pow(mp, 1.0 / p) / (std::sqrt(p) * std::sqrt(m2));
  // Delta method on (mean |Z|^p, mean Z^2).
  const double da = ratio / (p * mp);
  const double db = -ratio / (2.0 * m2);
  const Eigen::ArrayXd combined = da * (a - mp) + db * (b - m2);
  const double variance = combined.square().sum() / static_cast<double>(m - 1);
  out.max_ratio = ratio;
  out.mean_ratio = ratio;
  out.std_error = std::sqrt(variance / static_cast<double>(m));
  return out;
}

std::vector<SubgaussianMoment> check_subgaussian(const ClassSpec& cls, int pair_count, const std::vector<double>& moments,
                                                 int mc_samples, std::uint64_t seed) {
  require(pair_count >= 1, "check_subgaussian: pair_count must be >= 1");
  require(!moments.empty(), "check_subgaussian: need at least one moment");
  for (double p : moments) require(p >= 2.0, "check_subgaussian: moments must be >= 2");
  require(mc_samples >= 2, "check_subgaussian: need at least two Monte Carlo samples");

  const auto points = sample_points(cls.body, 2 * pair_count, SampleMode::mixed,
                                    detail::derive_seed(seed, static_cast<std::uint64_t>(Stream::subgaussian_pairs)));
  std::vector<SubgaussianMoment> out;
  for (double p : moments) {
    SubgaussianMoment summary;
    summary.p = p;
    int used = 0;
    for (int i = 0; i < pair_count; ++i) {
      // The first pair is measured against the origin.
      const Vector& t = points[static_cast<std::size_t>(2 * i)];
      const Vector difference = i == 0 ? t : Vector(t - points[static_cast<std::size_t>(2 * i + 1)]);
      if (difference.isZero(0.0)) continue;
      const auto one = subgaussian_ratio(cls.design, difference, p, mc_samples, seed, static_cast<std::uint64_t>(i));
      if (used == 0 || one.max_ratio > summary.max_ratio) {
        summary.max_ratio = one.max_ratio;
        summary.std_error = one.std_error;
      }
      summary.mean_ratio += one.mean_ratio;
      ++used;
    }
    if (used > 0) summary.mean_ratio /= used;
    out.push_back(summary);
  }
  return out;
}

}  // namespace fixpoint
