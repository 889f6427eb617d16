#include <cp2m/ccl.hpp>
#include <cp2m/rng.hpp>

#include <benchmark/benchmark.h>

namespace {

cp2m::BinaryMask random_mask(int size, double density)
{
    cp2m::RngStream rng(1);
    cp2m::BinaryMask m(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            m.set(x, y, rng.uniform01() < density);
        }
    }
    return m;
}

void BM_LabelComponents(benchmark::State& state)
{
    const auto size = static_cast<int>(state.range(0));
    const auto m = random_mask(size, 0.5);
    const auto conn = state.range(1) == 4 ? cp2m::Connectivity::four : cp2m::Connectivity::eight;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cp2m::label_components(m, conn));
    }
    state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_LabelComponents)->Args({256, 4})->Args({256, 8})->Args({1000, 8});

void BM_ExtractInstances(benchmark::State& state)
{
    cp2m::RngStream rng(2);
    cp2m::LabelMap lbl(1000, 1000, 6, cp2m::ClassIndex{5});
    for (int b = 0; b < 400; ++b) {
        const auto c = static_cast<cp2m::ClassIndex>(rng.uniform_int(0, 5));
        const auto x0 = static_cast<int>(rng.uniform_int(0, 960));
        const auto y0 = static_cast<int>(rng.uniform_int(0, 960));
        for (int y = y0; y < y0 + 40; ++y) {
            for (int x = x0; x < x0 + 40; ++x) {
                lbl.set(x, y, c);
            }
        }
    }
    const std::vector<cp2m::ClassIndex> classes{0, 1, 2, 3, 4};
    for (auto _ : state) {
        benchmark::DoNotOptimize(cp2m::extract_instances(lbl, classes, cp2m::Connectivity::eight, 64));
    }
}
BENCHMARK(BM_ExtractInstances)->Unit(benchmark::kMillisecond);

} // namespace
