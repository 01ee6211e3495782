#include <benchmark/benchmark.h>

#include "textkernel/geometry.hpp"
#include "textkernel/labels.hpp"
#include "textkernel/pipeline.hpp"
#include "textkernel/scene.hpp"

namespace {

using namespace textkernel;

void BM_OffsetRect(benchmark::State& state) {
  const Polygon p = make_rotated_rect(0, 0, 200, 60, 0.3);
  const double d = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(offset_polygon(p, d));
}
BENCHMARK(BM_OffsetRect)->Arg(2)->Arg(10)->Arg(-10);

void BM_OffsetBand(benchmark::State& state) {
  const Polygon p = make_curved_band(0, 0, 300, 50, 0.2, 40, 0.08, 0.5, 48);
  const double d = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(offset_polygon(p, d));
}
BENCHMARK(BM_OffsetBand)->Arg(2)->Arg(10)->Arg(-10);

void BM_DistanceLabel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RegionLabel r = region_label(bench_scene(n, n / 6.0));
  for (auto _ : state) benchmark::DoNotOptimize(distance_label(r.ids).data.data());
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_DistanceLabel)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  const Polygon p = make_curved_band(256, 256, 400, 80, 0.1, 40, 0.05, 0.0, 48);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(p, 512, 512).data.data());
}
BENCHMARK(BM_Rasterize)->Unit(benchmark::kMicrosecond);

void BM_ConnectedComponents(benchmark::State& state) {
  const LabelBundle l = make_labels(bench_scene(1024, 165));
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(l.kernel).count);
}
BENCHMARK(BM_ConnectedComponents)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
