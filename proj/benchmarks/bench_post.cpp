#include <benchmark/benchmark.h>

#include <map>

#include "textkernel/expand.hpp"
#include "textkernel/labels.hpp"
#include "textkernel/pipeline.hpp"

namespace {

using namespace textkernel;

struct Fixture {
  Scene scene;
  LabelBundle labels;
  ExpanderMaps maps;
  double shrink = 0.0;
};

// range(0): map side; range(1): instance thickness.
const Fixture& fixture(int size, int thickness) {
  static std::map<std::pair<int, int>, Fixture> cache;
  auto [it, fresh] = cache.try_emplace({size, thickness});
  if (fresh) {
    Fixture& f = it->second;
    f.scene = bench_scene(size, thickness);
    f.labels = make_labels(f.scene);
    f.maps = maps_from_labels(f.labels);
    f.shrink = mean_shrink_offset(f.scene);
  }
  return it->second;
}

void run(benchmark::State& state, ExpandMethod method) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  PostConfig cfg;
  cfg.fixed_delta = f.shrink;
  std::uint64_t touches = 0;
  for (auto _ : state) {
    DetectionResult d = run_expand(method, f.maps.inputs(), cfg);
    touches = d.counters.decision_touches;
    benchmark::DoNotOptimize(d.instances.data());
  }
  state.counters["touches"] = static_cast<double>(touches);
}

void BM_BoundaryGuided(benchmark::State& s) { run(s, ExpandMethod::kBoundaryGuided); }
void BM_PixelAggregation(benchmark::State& s) { run(s, ExpandMethod::kPixelAggregation); }
void BM_FixedOffset(benchmark::State& s) { run(s, ExpandMethod::kFixedOffset); }

void sizes(benchmark::internal::Benchmark* b) {
  b->Args({1024, 165})->Args({1024, 82})->Args({1024, 41})->Args({512, 40});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_BoundaryGuided)->Apply(sizes);
BENCHMARK(BM_PixelAggregation)->Apply(sizes);
BENCHMARK(BM_FixedOffset)->Apply(sizes);
