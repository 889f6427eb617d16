#include <cp2m/png_io.hpp>
#include <cp2m/rng.hpp>

#include <benchmark/benchmark.h>

namespace {

cp2m::ImagePlane gradient_image(int size)
{
    cp2m::ImagePlane img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            img.set(x, y, {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), static_cast<std::uint8_t>(x ^ y)});
        }
    }
    return img;
}

void BM_Encode(benchmark::State& state)
{
    const auto img = gradient_image(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cp2m::encode_image(img));
    }
}
BENCHMARK(BM_Encode)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state)
{
    const auto bytes = cp2m::encode_image(gradient_image(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cp2m::decode_image(bytes));
    }
}
BENCHMARK(BM_Decode)->Arg(1000)->Unit(benchmark::kMillisecond);

} // namespace
