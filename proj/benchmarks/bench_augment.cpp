#include <cp2m/augment.hpp>
#include <cp2m/dataset.hpp>

#include <benchmark/benchmark.h>

namespace {

std::vector<cp2m::SamplePair> pool(int size, int count)
{
    cp2m::RngStream rng(3);
    std::vector<cp2m::SamplePair> out;
    for (int i = 0; i < count; ++i) {
        cp2m::LabelMap lbl(size, size, 6, cp2m::ClassIndex{5});
        cp2m::ImagePlane img(size, size);
        for (int b = 0; b < 60; ++b) {
            const auto c = static_cast<cp2m::ClassIndex>(rng.uniform_int(0, 5));
            const auto bw = static_cast<int>(rng.uniform_int(8, size / 6));
            const auto x0 = static_cast<int>(rng.uniform_int(0, size - bw));
            const auto y0 = static_cast<int>(rng.uniform_int(0, size - bw));
            for (int y = y0; y < y0 + bw; ++y) {
                for (int x = x0; x < x0 + bw; ++x) {
                    lbl.set(x, y, c);
                    img.set(x, y, {static_cast<std::uint8_t>(40 * c), static_cast<std::uint8_t>(x), 0});
                }
            }
        }
        out.emplace_back(std::move(img), std::move(lbl));
    }
    return out;
}

void BM_Cp2m(benchmark::State& state)
{
    const auto size = static_cast<int>(state.range(0));
    const cp2m::InMemorySource source(pool(size, 4));
    cp2m::AugmentConfig cfg;
    cfg.out_width = size;
    cfg.out_height = size;
    std::uint64_t i = 0;
    for (auto _ : state) {
        auto rng = cp2m::RngStream::for_sample(1, i++);
        benchmark::DoNotOptimize(cp2m::cp2m(source, cfg, rng));
    }
}
BENCHMARK(BM_Cp2m)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Mosaic(benchmark::State& state)
{
    const auto samples = pool(1000, 4);
    cp2m::AugmentConfig cfg;
    cp2m::RngStream rng(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cp2m::mosaic({&samples[0], &samples[1], &samples[2], &samples[3]}, cfg, rng));
    }
}
BENCHMARK(BM_Mosaic)->Unit(benchmark::kMillisecond);

} // namespace
