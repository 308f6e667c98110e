#include "fixpoint/widths.hpp"

#include <cmath>
#include <optional>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "fixpoint/error.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/random.hpp"

namespace fixpoint {

using detail::require;

WidthEstimate estimate_width(const ClassSpec& cls, const Vector& shift, double s, int mc_samples, std::uint64_t seed) {
  require(s > 0.0, "estimate_width: scale s must be positive");
  require(mc_samples >= 2, "estimate_width: mc_samples must be >= 2");
  require(shift.size() == cls.body.dimension(), "estimate_width: shift has the wrong dimension");
  require(contains(cls.body, shift), "estimate_width: shift does not lie in the body");

  const auto count = static_cast<std::size_t>(mc_samples);
  std::vector<std::optional<double>> values(count);
  parallel_for(count, [&](std::size_t k) {
    Rng rng = Rng::keyed(seed, Stream::width_draws, k);
    const Vector g = rng.normal_vector(cls.body.dimension());
    try {
      values[k] = linmax(cls.body, shift, s, g).value;
    } catch (const ConvergenceError&) {
      values[k].reset();
    }
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  int used = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    sum_sq += *v * *v;
    ++used;
  }
  const int failed = mc_samples - used;
  if (failed * 100 > mc_samples || used < 2)
    throw ConvergenceError("estimate_width: " + std::to_string(failed) + " of " + std::to_string(mc_samples) +
                               " linmax draws failed to converge",
                           shift, static_cast<double>(failed));

  WidthEstimate out;
  out.mc_samples = used;
  out.scale = s;
  out.shift = shift;
  out.value = sum / used;
  const double variance = std::max(0.0, (sum_sq - used * out.value * out.value) / (used - 1));
  out.std_error = std::sqrt(variance / used);
  return out;
}

double lp_width_order(int n, double p, double r) {
  require(n >= 2, "lp_width_order: n must be >= 2");
  require(p > 1.0 && p < 2.0, "lp_width_order: p must lie in (1, 2)");
  require(r > 0.0, "lp_width_order: r must be positive");
  const double nd = static_cast<double>(n);
  const double threshold = std::pow(nd, -(1.0 / p - 0.5));
  return r >= threshold ? std::pow(nd, 1.0 - 1.0 / p) : r * std::sqrt(nd);
}

double chi_mean(int n) {
  require(n >= 1, "chi_mean: n must be positive");
  return std::sqrt(2.0) * boost::math::tgamma_ratio(0.5 * (n + 1), 0.5 * n);
}

}  // namespace fixpoint
