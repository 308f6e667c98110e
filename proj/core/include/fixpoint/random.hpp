#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace fixpoint {

/// Stream identifiers used to split one user seed into independent
/// sub-streams. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
  width_draws = 1,
  pool_points = 2,
  pool_order = 3,
  design_rows = 4,
  noise_values = 5,
  shifts = 6,
  kernel_directions = 7,
  measure_draws = 8,
  subgaussian_pairs = 9,
  subgaussian_draws = 10,
  targets = 11,
  trials = 12,
  localized_pool = 13,
  shift_measure = 14,
};

/// xoshiro256** seeded through splitmix64 from a (seed, stream, index) key.
/// Each key yields an independent generator, so draw k of a Monte Carlo
/// loop can be reproduced without replaying draws 0..k-1.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept { reseed(seed); }

  static Rng keyed(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept {
    std::uint64_t key = mix(seed ^ 0x6a09e667f3bcc909ULL);
    key = mix(key ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL));
    key = mix(key ^ (index + 0xbb67ae8584caa73bULL));
    return Rng(key);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape) noexcept;

  double exponential() noexcept { return -std::log1p(-uniform()); }

  /// Student t with `dof` degrees of freedom.
  double student_t(double dof) noexcept { return normal() / std::sqrt(2.0 * gamma(0.5 * dof) / dof); }

  Eigen::VectorXd normal_vector(Eigen::Index n) noexcept;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  void reseed(std::uint64_t seed) noexcept {
    for (auto& word : state_) {
      seed += 0x9e3779b97f4a7c15ULL;
      word = mix(seed);
    }
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

inline double Rng::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline Eigen::VectorXd Rng::normal_vector(Eigen::Index n) noexcept {
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = normal();
  return g;
}

}  // namespace fixpoint
