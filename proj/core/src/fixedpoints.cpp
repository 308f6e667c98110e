#include "fixpoint/fixedpoints.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "fixpoint/error.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/widths.hpp"
#include "internal.hpp"

namespace fixpoint {

using detail::require;

std::string to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::r_M: return "r_M";
    case FixedPointKind::r_Q: return "r_Q";
    case FixedPointKind::gamma_M: return "gamma_M";
    case FixedPointKind::gamma_Q: return "gamma_Q";
  }
  return "unknown";
}

FixedPointKind fixed_point_kind_from_string(const std::string& name) {
  if (name == "r_M") return FixedPointKind::r_M;
  if (name == "r_Q") return FixedPointKind::r_Q;
  if (name == "gamma_M") return FixedPointKind::gamma_M;
  if (name == "gamma_Q") return FixedPointKind::gamma_Q;
  throw InvalidArgument("unknown fixed-point kind '" + name + "' (expected r_M, r_Q, gamma_M or gamma_Q)");
}

std::vector<double> scale_grid(const ConvexBody& body, const GridConfig& grid) {
  require(grid.points >= 16, "grid: need at least 16 points");
  require(grid.min_fraction > 0.0 && grid.min_fraction < 1.0, "grid: min_fraction must lie in (0, 1)");
  const double top = body.radius();
  const double log_min = std::log(grid.min_fraction);
  std::vector<double> scales(static_cast<std::size_t>(grid.points));
  for (int i = 0; i < grid.points; ++i)
    scales[static_cast<std::size_t>(i)] = top * std::exp(log_min * (1.0 - static_cast<double>(i) / (grid.points - 1)));
  scales.back() = top;
  return scales;
}

std::vector<Vector> default_shifts(const ConvexBody& body, int count, std::uint64_t seed) {
  require(count >= 0, "default_shifts: count must be nonnegative");
  std::vector<Vector> shifts{Vector::Zero(body.dimension())};
  for (auto& p : sample_points(body, count, SampleMode::boundary, detail::derive_seed(seed, static_cast<std::uint64_t>(Stream::shifts))))
    shifts.push_back(std::move(p));
  return shifts;
}

namespace {

bool is_width_kind(FixedPointKind kind) { return kind == FixedPointKind::r_M || kind == FixedPointKind::r_Q; }

double right_hand_side(FixedPointKind kind, double constant, int N, double s) {
  const double n = static_cast<double>(N);
  switch (kind) {
    case FixedPointKind::r_M: return constant * s * s * std::sqrt(n);
    case FixedPointKind::r_Q: return constant * s * std::sqrt(n);
    case FixedPointKind::gamma_M: return constant * constant * s * s * n;
    case FixedPointKind::gamma_Q: return constant * constant * n;
  }
  return 0.0;
}

// Evaluates the defining inequality at one (shift, scale).
class Evaluator {
 public:
  Evaluator(FixedPointKind kind, const ClassSpec& cls, int N, double constant, const Vector& shift, int shift_index,
            const GridConfig& grid, std::uint64_t seed)
      : kind_(kind), cls_(cls), N_(N), constant_(constant), shift_(shift), shift_index_(shift_index), grid_(grid),
        seed_(seed) {
    if (!is_width_kind(kind)) sample_ = sample_points(cls.body, grid.pool_size, SampleMode::mixed, seed);
  }

  CurvePoint operator()(double s) const {
    CurvePoint point;
    point.shift_index = shift_index_;
    point.scale = s;
    point.rhs = right_hand_side(kind_, constant_, N_, s);
    if (is_width_kind(kind_)) {
      point.lhs = estimate_width(cls_, shift_, s, grid_.mc_samples, seed_).value;
    } else {
      // Once the count exceeds exp(rhs) the inequality fails; stop there.
      std::size_t stop_at = std::numeric_limits<std::size_t>::max();
      if (point.rhs < std::log(static_cast<double>(grid_.pool_size)))
        stop_at = static_cast<std::size_t>(std::floor(std::exp(point.rhs))) + 1;
      const auto pool = localize_pool(sample_, shift_, 4.0 * s, seed_);
      point.lhs = std::log(static_cast<double>(greedy_pack(pool, 0.5 * s, stop_at).size()));
    }
    point.holds = point.lhs <= point.rhs;
    return point;
  }

 private:
  FixedPointKind kind_;
  const ClassSpec& cls_;
  int N_;
  double constant_;
  const Vector& shift_;
  int shift_index_;
  const GridConfig& grid_;
  std::uint64_t seed_;
  std::vector<Vector> sample_;
};

struct ShiftOutcome {
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool floored = false;
  bool unresolved = false;
  bool noisy = false;
  std::vector<CurvePoint> refinement;
};

}  // namespace

FixedPointResult solve_fixed_point(FixedPointKind kind, const ClassSpec& cls, int N, double constant,
                                   const std::vector<Vector>& shifts, const GridConfig& grid, std::uint64_t seed) {
  require(N >= 1, "solve_fixed_point: N must be >= 1");
  require(constant > 0.0 && std::isfinite(constant), "solve_fixed_point: constant must be positive");
  require(!shifts.empty(), "solve_fixed_point: need at least one shift");
  require(grid.refine_steps >= 0, "solve_fixed_point: refine_steps must be nonnegative");
  require(grid.mc_samples >= 2, "solve_fixed_point: mc_samples must be >= 2");
  require(grid.pool_size >= 1, "solve_fixed_point: pool_size must be >= 1");
  for (const auto& shift : shifts) {
    require(shift.size() == cls.body.dimension(), "solve_fixed_point: shift has the wrong dimension");
    require(contains(cls.body, shift), "solve_fixed_point: shift does not lie in the body");
  }

  const std::vector<double> scales = scale_grid(cls.body, grid);
  const std::size_t cells = scales.size();
  const std::size_t shift_count = shifts.size();

  std::vector<std::unique_ptr<Evaluator>> evaluators(shift_count);
  parallel_for(shift_count, [&](std::size_t j) {
    evaluators[j] = std::make_unique<Evaluator>(kind, cls, N, constant, shifts[j], static_cast<int>(j), grid,
                                                detail::derive_seed(seed, 1000 + j));
  });

  std::vector<CurvePoint> table(shift_count * cells);
  parallel_for(table.size(), [&](std::size_t k) { table[k] = (*evaluators[k / cells])(scales[k % cells]); });

  std::vector<ShiftOutcome> outcomes(shift_count);
  parallel_for(shift_count, [&](std::size_t j) {
    const CurvePoint* row = &table[j * cells];
    auto& out = outcomes[j];
    std::ptrdiff_t last_fail = -1;
    for (std::size_t i = 0; i < cells; ++i)
      if (!row[i].holds) last_fail = static_cast<std::ptrdiff_t>(i);
    if (last_fail < 0) {
      out.floored = true;
      out.value = out.low = out.high = scales.front();
      return;
    }
    for (std::ptrdiff_t i = 0; i < last_fail; ++i) out.noisy = out.noisy || row[i].holds;
    if (static_cast<std::size_t>(last_fail) == cells - 1) {
      out.unresolved = true;
      out.value = out.low = out.high = scales.back();
      return;
    }
    double lo = scales[static_cast<std::size_t>(last_fail)];
    double hi = scales[static_cast<std::size_t>(last_fail) + 1];
    for (int step = 0; step < grid.refine_steps; ++step) {
      const double mid = std::sqrt(lo * hi);
      CurvePoint point = (*evaluators[j])(mid);
      (point.holds ? hi : lo) = mid;
      out.refinement.push_back(point);
    }
    out.low = lo;
    out.high = hi;
    out.value = hi;
  });

  FixedPointResult result;
  result.kind = kind;
  result.constant = constant;
  result.sample_size = N;
  result.shifts_probed = shifts;
  std::size_t best = 0;
  for (std::size_t j = 1; j < shift_count; ++j)
    if (outcomes[j].value > outcomes[best].value) best = j;
  const auto& chosen = outcomes[best];
  result.critical_shift = static_cast<int>(best);
  result.value = chosen.value;
  result.low = chosen.low;
  result.high = chosen.high;
  result.floored = chosen.floored;
  result.unresolved = chosen.unresolved;
  for (const auto& o : outcomes) result.noisy = result.noisy || o.noisy;
  for (std::size_t j = 0; j < shift_count; ++j) {
    result.curve.insert(result.curve.end(), table.begin() + static_cast<std::ptrdiff_t>(j * cells),
                        table.begin() + static_cast<std::ptrdiff_t>((j + 1) * cells));
    result.curve.insert(result.curve.end(), outcomes[j].refinement.begin(), outcomes[j].refinement.end());
  }
  return result;
}

double ball_oracle(FixedPointKind kind, int n, int N, double constant, double R) {
  require(n >= 1 && N >= 1, "ball_oracle: n and N must be positive");
  require(constant > 0.0 && R > 0.0, "ball_oracle: constant and R must be positive");
  const double sqrt_n_samples = std::sqrt(static_cast<double>(N));
  const double c_pack = std::log(16.0);
  switch (kind) {
    case FixedPointKind::r_M: return std::min(R, chi_mean(n) / (constant * sqrt_n_samples));
    case FixedPointKind::r_Q: return chi_mean(n) <= constant * sqrt_n_samples ? 0.0 : R;
    case FixedPointKind::gamma_M:
      if (std::isinf(constant)) return 0.0;
      return std::min(R, std::sqrt(c_pack * n / (constant * constant * N)));
    case FixedPointKind::gamma_Q: return c_pack * n <= constant * constant * N ? 0.0 : R;
  }
  return 0.0;
}

}  // namespace fixpoint
