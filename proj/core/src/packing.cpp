#include "fixpoint/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "fixpoint/error.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/random.hpp"

namespace fixpoint {

using detail::require;

std::vector<std::size_t> greedy_pack_indices(const std::vector<Vector>& pool, double separation, std::size_t stop_at) {
  require(separation > 0.0, "greedy_pack: separation must be positive");
  std::vector<std::size_t> kept;
  if (pool.empty() || stop_at == 0) return kept;
  const double sep_sq = separation * separation;
  const Eigen::Index n = pool.front().size();
  constexpr Eigen::Index block = 64;
  Matrix centers(n, std::min<Eigen::Index>(static_cast<Eigen::Index>(pool.size()), 256));
  Eigen::Index count = 0;
  for (std::size_t i = 0; i < pool.size() && kept.size() < stop_at; ++i) {
    const Vector& x = pool[i];
    bool separated = true;
    for (Eigen::Index start = 0; start < count && separated; start += block) {
      const Eigen::Index width = std::min(block, count - start);
      separated = ((centers.middleCols(start, width).colwise() - x).colwise().squaredNorm().array() >= sep_sq).all();
    }
    if (!separated) continue;
    if (count == centers.cols()) centers.conservativeResize(Eigen::NoChange, 2 * centers.cols());
    centers.col(count++) = x;
    kept.push_back(i);
  }
  return kept;
}

std::vector<Vector> greedy_pack(const std::vector<Vector>& pool, double separation, std::size_t stop_at) {
  std::vector<Vector> out;
  for (std::size_t i : greedy_pack_indices(pool, separation, stop_at)) out.push_back(pool[i]);
  return out;
}

std::vector<Vector> localize_pool(const std::vector<Vector>& sample, const Vector& shift, double localization,
                                  std::uint64_t seed) {
  require(localization > 0.0, "localized_pool: localization must be positive");
  std::vector<Vector> pool(sample.size());
  const double n = static_cast<double>(shift.size());
  parallel_for(pool.size(), [&](std::size_t i) {
    Vector y = sample[i] - shift;
    const double norm = y.norm();
    if (norm > localization) {
      y *= localization / norm;
      // Interior-mode points fill the ball rather than its sphere.
      if (i % 2 == 0) y *= std::pow(Rng::keyed(seed, Stream::localized_pool, i).uniform(), 1.0 / n);
    }
    pool[i] = shift + y;
  });

  Rng order = Rng::keyed(seed, Stream::pool_order, 0);
  std::shuffle(pool.begin(), pool.end(), order);
  return pool;
}

std::vector<Vector> localized_pool(const ConvexBody& body, const Vector& shift, double localization, int pool_size,
                                   std::uint64_t seed) {
  require(pool_size >= 1, "localized_pool: pool size must be >= 1");
  require(shift.size() == body.dimension(), "localized_pool: shift has the wrong dimension");
  require(contains(body, shift), "localized_pool: shift does not lie in the body");
  return localize_pool(sample_points(body, pool_size, SampleMode::mixed, seed), shift, localization, seed);
}

PackingEstimate pack_localized(const ConvexBody& body, const Vector& shift, double localization, double separation,
                               int pool_size, std::uint64_t seed, std::size_t stop_at) {
  require(separation > 0.0, "pack_localized: separation must be positive");
  PackingEstimate out;
  out.separation = separation;
  out.localization_scale = localization;
  out.shift = shift;
  out.pool_size = pool_size;
  out.centers = greedy_pack(localized_pool(body, shift, localization, pool_size, seed), separation, stop_at);
  out.count = static_cast<int>(out.centers.size());
  return out;
}

PackingEstimate local_pack(const ClassSpec& cls, const Vector& shift, double s, int pool_size, std::uint64_t seed,
                           std::size_t stop_at) {
  require(s > 0.0, "local_pack: scale s must be positive");
  return pack_localized(cls.body, shift, 4.0 * s, 0.5 * s, pool_size, seed, stop_at);
}

int exact_cover(const std::vector<Vector>& points, double radius) {
  require(radius >= 0.0, "exact_cover: radius must be nonnegative");
  if (points.size() > 14) throw SizeLimitError("exact_cover: at most 14 points supported");
  const auto m = static_cast<unsigned>(points.size());
  if (m == 0) return 0;
  std::vector<std::uint32_t> covers(m, 0);
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j)
      if ((points[i] - points[j]).norm() <= radius) covers[i] |= 1u << j;

  const std::uint32_t all = (1u << m) - 1u;
  int best = static_cast<int>(m);
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    const int size = std::popcount(mask);
    if (size >= best) continue;
    std::uint32_t covered = 0;
    for (unsigned i = 0; i < m; ++i)
      if (mask & (1u << i)) covered |= covers[i];
    if (covered == all) best = size;
  }
  return best;
}

}  // namespace fixpoint
