#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fixpoint/geometry.hpp"

namespace fixpoint {

struct PackingEstimate {
  int count = 0;  // lower bound on the packing number
  double separation = 0.0;
  double localization_scale = 0.0;
  Vector shift;
  int pool_size = 0;
  std::vector<Vector> centers;  // absolute coordinates
};

/// Scans the pool in index order and keeps a point iff it is at distance
/// >= separation from every kept point. Stops once stop_at points are kept.
std::vector<Vector> greedy_pack(const std::vector<Vector>& pool, double separation,
                                std::size_t stop_at = std::numeric_limits<std::size_t>::max());

/// Same scan, returning the kept pool indices.
std::vector<std::size_t> greedy_pack_indices(const std::vector<Vector>& pool, double separation,
                                             std::size_t stop_at = std::numeric_limits<std::size_t>::max());

/// Seeded pool of members of (T - shift) intersected with localization * B_2,
/// returned in absolute coordinates and in the seeded scan order. Points of
/// T outside the ball are pulled radially towards the shift, which keeps
/// them inside T.
std::vector<Vector> localized_pool(const ConvexBody& body, const Vector& shift, double localization, int pool_size,
                                   std::uint64_t seed);

/// The localization and shuffle steps of localized_pool applied to a
/// precomputed mixed-mode sample of T (reused across scales).
std::vector<Vector> localize_pool(const std::vector<Vector>& sample, const Vector& shift, double localization,
                                  std::uint64_t seed);

/// Greedy packing of a localized pool at the given separation.
PackingEstimate pack_localized(const ConvexBody& body, const Vector& shift, double localization, double separation,
                               int pool_size, std::uint64_t seed,
                               std::size_t stop_at = std::numeric_limits<std::size_t>::max());

/// Packing of (T - shift) intersected with 4s B_2 at separation s/2.
PackingEstimate local_pack(const ClassSpec& cls, const Vector& shift, double s, int pool_size, std::uint64_t seed,
                           std::size_t stop_at = std::numeric_limits<std::size_t>::max());

/// Minimal number of input points whose radius-balls cover every input
/// point. Exhaustive; at most 14 points.
int exact_cover(const std::vector<Vector>& points, double radius);

}  // namespace fixpoint
