#include <limits>
#include <vector>

#include <benchmark/benchmark.h>

#include "fixpoint/geometry.hpp"
#include "fixpoint/learners.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/widths.hpp"

namespace fixpoint {
namespace {

ConvexBody lp_body(int n, double p) { return ConvexBody::lp_ball(n, p); }

void BM_ProjectLp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto body = lp_body(n, 1.5);
  Rng rng = Rng::keyed(1, Stream::targets, 0);
  const Vector x = 2.0 * rng.normal_vector(n);
  for (auto _ : state) benchmark::DoNotOptimize(project(body, x));
}
BENCHMARK(BM_ProjectLp)->RangeMultiplier(4)->Range(16, 1024);

void BM_ProjectIntersection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto body = ConvexBody::intersection(lp_body(n, 2.0), ConvexBody::lp_ball(n, std::numeric_limits<double>::infinity(), 0.3));
  Rng rng = Rng::keyed(2, Stream::targets, 0);
  const Vector x = rng.normal_vector(n);
  for (auto _ : state) benchmark::DoNotOptimize(project(body, x));
}
BENCHMARK(BM_ProjectIntersection)->Arg(8)->Arg(64);

void BM_Linmax(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto body = lp_body(n, 1.5);
  Rng rng = Rng::keyed(3, Stream::targets, 0);
  const Vector g = rng.normal_vector(n);
  const Vector center = Vector::Zero(n);
  for (auto _ : state) benchmark::DoNotOptimize(linmax(body, center, 0.2, g));
}
BENCHMARK(BM_Linmax)->RangeMultiplier(4)->Range(16, 1024);

void BM_GreedyPack(benchmark::State& state) {
  const int pool_size = static_cast<int>(state.range(0));
  const auto body = lp_body(8, 2.0);
  const auto pool = sample_points(body, pool_size, SampleMode::mixed, 4);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_pack(pool, 0.5));
  state.SetItemsProcessed(state.iterations() * pool_size);
}
BENCHMARK(BM_GreedyPack)->RangeMultiplier(4)->Range(256, 16384);

void BM_Width(benchmark::State& state) {
  const ClassSpec cls{lp_body(static_cast<int>(state.range(0)), 1.5)};
  const Vector shift = Vector::Zero(cls.body.dimension());
  for (auto _ : state) benchmark::DoNotOptimize(estimate_width(cls, shift, 0.3, 256, 5));
}
BENCHMARK(BM_Width)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Erm(benchmark::State& state) {
  const ClassSpec cls{lp_body(16, 1.5)};
  const auto data = generate_dataset(cls, Vector::Zero(16), NoiseModel::gaussian(0.5), static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(erm(cls.body, data));
}
BENCHMARK(BM_Erm)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fixpoint

BENCHMARK_MAIN();
