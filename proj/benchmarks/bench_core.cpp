#include <benchmark/benchmark.h>

#include "cyclegate/gate.hpp"
#include "cyclegate/rng.hpp"
#include "cyclegate/synth.hpp"

using namespace cyclegate;

namespace {

BinaryMask bench_mask(std::uint64_t seed, int w, int h, double density) {
    CounterRng rng(seed, 0);
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, rng.next_double() < density);
    return m;
}

void BM_Iou(benchmark::State& state) {
    int side = static_cast<int>(state.range(0));
    BinaryMask a = bench_mask(1, side, side, 0.3);
    BinaryMask b = bench_mask(2, side, side, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(iou(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Iou)->Arg(64)->Arg(256);

void BM_NccResponseMap(benchmark::State& state) {
    int size = static_cast<int>(state.range(0));
    auto [support, mask] = synth_support(11, 0, size, size / 5);
    Raster query = synth_background(12, 0, size);

    // crop the mask bbox as the template, same as the reference segmenter
    int x0 = size, y0 = size, x1 = -1, y1 = -1;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (mask.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    Raster patch(x1 - x0 + 1, y1 - y0 + 1, 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) patch.set(x - x0, y - y0, 0, support.at(x, y));

    for (auto _ : state) benchmark::DoNotOptimize(ncc_response_map(patch, query));
}
BENCHMARK(BM_NccResponseMap)->Arg(64)->Arg(96);

void BM_GatePair(benchmark::State& state) {
    auto [support, mask] = synth_support(21, 0, 96, 20);
    Raster query = synth_background(22, 0, 96);
    GateConfig cfg;
    GateStage stage;
    stage.segmenter.kind = SegmenterKind::ReferenceNcc;
    stage.threshold = 0.18;
    cfg.stages.push_back(stage);
    GateRuntime runtime(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(runtime.gate(support, mask, query, "bench"));
}
BENCHMARK(BM_GatePair);

}  // namespace

BENCHMARK_MAIN();
