// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.

#include "commands.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

#include <cp2m/augment.hpp>
#include <cp2m/ccl.hpp>
#include <cp2m/dataset.hpp>
#include <cp2m/error.hpp>
#include <cp2m/metrics.hpp>
#include <cp2m/png_io.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace cp2m;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kTimeLimitSeconds = 60.0;
constexpr double kMetricTolerance = 1e-12;
constexpr double kGradientTolerance = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kGateLow = 0.48;
constexpr double kGateHigh = 0.52;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

// 1. 24 train + 14 test blank 6000x6000 scenes, 1000 windows and stride.
Outcome tiling()
{
    cp2m::testing::TempDir dir("accept_tile");
    const auto cmap = ColorMap::potsdam();
    // Every scene is the same blank raster; write it once and reference it from all entries.
    const ImagePlane blank(6000, 6000, Rgb{255, 255, 255});
    fs::create_directories(dir / "scenes");
    const auto image_bytes = encode_image(blank);
    Manifest m;
    m.base_dir = dir.path();
    m.colormap = "colormap.txt";
    cmap.save(dir / "colormap.txt");
    for (int i = 0; i < 38; ++i) {
        const auto stem = "top_potsdam_" + std::to_string(i);
        write_file(dir / "scenes" / (stem + "_RGB.png"), image_bytes);
        write_file(dir / "scenes" / (stem + "_label.png"), image_bytes);
        m.entries.push_back({i < 24 ? Split::train : Split::test, fs::path("scenes") / (stem + "_RGB.png"),
                             fs::path("scenes") / (stem + "_label.png")});
    }
    save_manifest(m, dir / "manifest.txt");

    cli::TileOptions opt;
    opt.manifest = dir / "manifest.txt";
    opt.out_dir = dir / "tiles";
    opt.spec = {1000, 1000, 1000, 1000};
    opt.workers = 1;
    const auto t = Clock::now();
    const auto report = cli::cmd_tile(opt);
    const double elapsed = seconds_since(t);

    const auto tiles = load_manifest(opt.out_dir / "manifest.txt");
    const auto train = tiles.split(Split::train).size();
    const auto test = tiles.split(Split::test).size();
    std::ostringstream d;
    d << "train=" << train << " test=" << test << " time=" << elapsed << "s";
    return {report.ok() && train == 864 && test == 504 && report.get("train_tiles") == "864" &&
                report.get("test_tiles") == "504" && elapsed < kTimeLimitSeconds,
            d.str()};
}

// 2. Exhaustive 4x4 masks plus random 64x64 masks against BFS flood fill.
Outcome ccl()
{
    const auto t = Clock::now();
    std::size_t mismatches = 0;
    std::size_t checked = 0;
    auto check = [&](int w, int h, const std::vector<std::uint8_t>& bits) {
        for (auto conn : {Connectivity::four, Connectivity::eight}) {
            const auto [ids, count] = oracle::flood_fill(w, h, bits, conn == Connectivity::eight);
            const auto got = label_components(BinaryMask(w, h, bits), conn);
            if (got.count != count || !oracle::same_partition(got.ids, ids)) {
                ++mismatches;
            }
            ++checked;
        }
    };
    std::vector<std::uint8_t> bits(16);
    for (std::uint32_t m = 0; m < (1u << 16); ++m) {
        for (int i = 0; i < 16; ++i) {
            bits[static_cast<std::size_t>(i)] = (m >> i) & 1u;
        }
        check(4, 4, bits);
    }
    RngStream rng(2);
    for (int i = 0; i < 1000; ++i) {
        check(64, 64, oracle::random_bits(64, 64, rng.uniform01(), rng));
    }
    const double elapsed = seconds_since(t);
    std::ostringstream d;
    d << checked << " labelings, " << mismatches << " mismatches, time=" << elapsed << "s";
    return {mismatches == 0 && elapsed < kTimeLimitSeconds, d.str()};
}

Patch make_full_or_random_patch(const ImagePlane& pixels, ClassIndex cls, const std::vector<std::uint8_t>& bits)
{
    Patch p;
    p.pixels = pixels;
    p.class_index = cls;
    p.instance.class_index = cls;
    p.instance.mask = BinaryMask(pixels.width(), pixels.height(), bits);
    p.instance.area = p.instance.mask.popcount();
    p.instance.bbox = {0, 0, pixels.width() - 1, pixels.height() - 1};
    return p;
}

// 3. Mask compositing.
Outcome compositing()
{
    RngStream rng(3);
    bool ok = true;

    const auto canvas = oracle::random_sample(12, 9, 6, rng);
    const auto src = oracle::random_image(12, 9, rng);
    const std::vector<std::uint8_t> zeros(12 * 9, 0);
    const std::vector<std::uint8_t> ones(12 * 9, 1);
    const bool zero_ok = paste_patch(canvas, make_full_or_random_patch(src, 4, zeros), {0, 0}) == canvas;
    const auto full = paste_patch(canvas, make_full_or_random_patch(src, 4, ones), {0, 0});
    const bool full_ok = full.image == src && full.label == LabelMap(12, 9, 6, ClassIndex{4});
    ok = zero_ok && full_ok;

    std::size_t mismatches = 0;
    std::size_t incoherent = 0;
    for (int i = 0; i < 1000; ++i) {
        const int w = static_cast<int>(rng.uniform_int(1, 32));
        const int h = static_cast<int>(rng.uniform_int(1, 32));
        const auto base = oracle::random_sample(w, h, 6, rng);
        const int pw = static_cast<int>(rng.uniform_int(1, w));
        const int ph = static_cast<int>(rng.uniform_int(1, h));
        const auto patch = make_full_or_random_patch(oracle::random_image(pw, ph, rng),
                                                     static_cast<ClassIndex>(rng.uniform_int(0, 5)),
                                                     oracle::random_bits(pw, ph, rng.uniform01(), rng));
        const Offset at{static_cast<int>(rng.uniform_int(0, w - pw)), static_cast<int>(rng.uniform_int(0, h - ph))};
        const auto got = paste_patch(base, patch, at);
        const auto want = oracle::composite(base, patch.instance.mask, patch.pixels, patch.class_index, at.x, at.y);
        mismatches += got == want ? 0 : 1;
        // Coherence: image and label change only inside the placed mask.
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int px = x - at.x;
                const int py = y - at.y;
                const bool in_mask = px >= 0 && py >= 0 && px < pw && py < ph && patch.instance.mask.at(px, py);
                if (!in_mask && (got.image.at(x, y) != base.image.at(x, y) || got.label.at(x, y) != base.label.at(x, y))) {
                    ++incoherent;
                }
                if (in_mask && (got.image.at(x, y) != patch.pixels.at(px, py) || got.label.at(x, y) != patch.class_index)) {
                    ++incoherent;
                }
            }
        }
    }
    ok = ok && mismatches == 0 && incoherent == 0;
    std::ostringstream d;
    d << "zero_mask=" << (zero_ok ? "ok" : "bad") << " full_mask=" << (full_ok ? "ok" : "bad")
      << " random_mismatches=" << mismatches << " incoherent_pixels=" << incoherent;
    return {ok, d.str()};
}

// 4. Mosaic output size and quadrant boundaries.
Outcome mosaic_contract()
{
    RngStream rng(4);
    std::size_t wrong_size = 0;
    for (int i = 0; i < 1000; ++i) {
        AugmentConfig cfg;
        cfg.out_width = 2 * static_cast<int>(rng.uniform_int(1, 24));
        cfg.out_height = 2 * static_cast<int>(rng.uniform_int(1, 24));
        cfg.enable_flips = rng.bernoulli(0.5);
        cfg.enable_quarter_rotations = rng.bernoulli(0.5);
        const int need = std::max(cfg.out_width, cfg.out_height) / 2;
        std::array<SamplePair, 4> parts;
        for (auto& p : parts) {
            p = oracle::random_sample(need + static_cast<int>(rng.uniform_int(0, 8)),
                                      need + static_cast<int>(rng.uniform_int(0, 8)), 6, rng);
        }
        const auto m = mosaic({&parts[0], &parts[1], &parts[2], &parts[3]}, cfg, rng);
        wrong_size += m.width() == cfg.out_width && m.height() == cfg.out_height ? 0 : 1;
    }

    AugmentConfig cfg;
    cfg.out_width = 1000;
    cfg.out_height = 1000;
    std::array<SamplePair, 4> uniform;
    for (int q = 0; q < 4; ++q) {
        uniform[static_cast<std::size_t>(q)] =
            oracle::uniform_sample(1000, 1000, Rgb{static_cast<std::uint8_t>(60 * q), 0, 0}, static_cast<ClassIndex>(q), 6);
    }
    const auto m = mosaic({&uniform[0], &uniform[1], &uniform[2], &uniform[3]}, cfg, rng);
    std::size_t wrong_pixels = 0;
    for (int y = 0; y < 1000; ++y) {
        for (int x = 0; x < 1000; ++x) {
            const int q = (y >= 500 ? 2 : 0) + (x >= 500 ? 1 : 0);
            if (m.label.at(x, y) != q || m.image.at(x, y) != Rgb{static_cast<std::uint8_t>(60 * q), 0, 0}) {
                ++wrong_pixels;
            }
        }
    }
    std::ostringstream d;
    d << "wrong_size=" << wrong_size << "/1000 fixture_wrong_pixels=" << wrong_pixels;
    return {wrong_size == 0 && wrong_pixels == 0, d.str()};
}

// 5. Gate rates at p = 0.5.
Outcome gating()
{
    RngStream fix(5);
    std::vector<SamplePair> pool;
    for (int i = 0; i < 4; ++i) {
        pool.push_back(oracle::random_sample(16, 16, 6, fix));
    }
    const InMemorySource source(pool);
    AugmentConfig cfg;
    cfg.out_width = 8;
    cfg.out_height = 8;
    cfg.min_area = 2;
    cfg.p_mosaic = 0.5;
    cfg.p_cpm = 0.5;
    const int n = 10000;
    int mosaic_hits = 0;
    int cpm_hits = 0;
    for (int i = 0; i < n; ++i) {
        auto rng = RngStream::for_sample(2024, static_cast<std::uint64_t>(i));
        const auto trace = cp2m_traced(source, cfg, rng);
        mosaic_hits += trace.mosaic_applied ? 1 : 0;
        cpm_hits += trace.cpm_applied ? 1 : 0;
    }
    const double pm = static_cast<double>(mosaic_hits) / n;
    const double pc = static_cast<double>(cpm_hits) / n;
    std::ostringstream d;
    d << "mosaic_rate=" << pm << " cpm_rate=" << pc;
    return {pm >= kGateLow && pm <= kGateHigh && pc >= kGateLow && pc <= kGateHigh, d.str()};
}

// 6. Metrics against the set oracle and the hand case.
Outcome metrics()
{
    RngStream rng(6);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int c = static_cast<int>(rng.uniform_int(2, 6));
        const int w = static_cast<int>(rng.uniform_int(1, 16));
        const int h = static_cast<int>(rng.uniform_int(1, 16));
        const auto gt = oracle::random_labels(w, h, c, rng);
        const auto pred = oracle::random_labels(w, h, c, rng);
        const auto cm = confusion(pred, gt, c);
        const auto ref =
            oracle::set_metrics({pred.data().begin(), pred.data().end()}, {gt.data().begin(), gt.data().end()}, c);
        worst = std::max({worst, std::abs(miou(cm) - ref.miou), std::abs(pixel_accuracy(cm) - ref.accuracy)});
    }
    const LabelMap gt(4, 1, 2, std::vector<ClassIndex>{0, 0, 1, 1});
    const LabelMap pred(4, 1, 2, std::vector<ClassIndex>{0, 1, 1, 1});
    const auto cm = confusion(pred, gt, 2);
    const double hand_miou = miou(cm);
    const double hand_acc = pixel_accuracy(cm);
    std::ostringstream d;
    d.precision(17);
    d << "max_deviation=" << worst << " hand_miou=" << hand_miou << " hand_accuracy=" << hand_acc;
    return {worst <= kMetricTolerance && hand_miou == 7.0 / 12.0 && hand_acc == 0.75, d.str()};
}

// 7. Analytic gradient against central differences; zero loss for a correct one-hot.
Outcome gradient()
{
    RngStream rng(7);
    double worst = 0.0;
    for (int round = 0; round < 100; ++round) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 8));
        const int c = static_cast<int>(rng.uniform_int(2, 6));
        const auto gt = oracle::random_labels(static_cast<int>(n), 1, c, rng);
        PixelScores logits{n, c, std::vector<double>(n * static_cast<std::size_t>(c))};
        for (auto& v : logits.values) {
            v = (rng.uniform01() - 0.5) * 6.0;
        }
        LossParams p;
        for (int k = 0; k < c; ++k) {
            p.class_weights.push_back(0.25 + 2.0 * rng.uniform01());
        }
        p.lambda = rng.uniform01();
        const std::vector<double> theta{0.3, -1.2};
        const auto g = ce_gradient(logits, gt, p);
        for (std::size_t i = 0; i < logits.values.size(); ++i) {
            const double keep = logits.values[i];
            logits.values[i] = keep + kFiniteDifferenceStep;
            const double up = weighted_ce(softmax(logits), gt, p, theta);
            logits.values[i] = keep - kFiniteDifferenceStep;
            const double down = weighted_ce(softmax(logits), gt, p, theta);
            logits.values[i] = keep;
            const double fd = (up - down) / (2.0 * kFiniteDifferenceStep);
            const double scale = std::max(std::abs(fd), std::abs(g[i]));
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(fd - g[i]) / scale);
            }
        }
    }
    const PixelScores one_hot{3, 3, {1, 0, 0, 0, 0, 1, 0, 1, 0}};
    const LabelMap gt(3, 1, 3, std::vector<ClassIndex>{0, 2, 1});
    const double loss = weighted_ce(one_hot, gt, LossParams{{1.0, 1.0, 1.0}, 0.0, Regularizer::l2}, {});
    std::ostringstream d;
    d << "max_relative_error=" << worst << " one_hot_loss=" << loss;
    return {worst < kGradientTolerance && loss == 0.0, d.str()};
}

std::vector<fs::path> files_under(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            out.push_back(fs::relative(e.path(), dir));
        }
    }
    std::ranges::sort(out);
    return out;
}

// Small train set of smooth synthetic tiles with blobby labels.
fs::path synthetic_tiles(const fs::path& dir, int count, int size)
{
    RngStream rng(8);
    std::vector<std::pair<Split, SamplePair>> scenes;
    const auto cmap = ColorMap::potsdam();
    for (int i = 0; i < count; ++i) {
        auto lbl = oracle::blobby_labels(size, size, 6, 40, rng);
        ImagePlane img(size, size);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const auto c = cmap.entries()[lbl.at(x, y)].color;
                img.set(x, y,
                        {static_cast<std::uint8_t>((c.r + x) / 2), static_cast<std::uint8_t>((c.g + y) / 2),
                         static_cast<std::uint8_t>((c.b + x + y) / 3)});
            }
        }
        scenes.emplace_back(Split::train, SamplePair(std::move(img), std::move(lbl)));
    }
    return cp2m::testing::write_dataset(dir, cmap, scenes);
}

// 8. Byte-identical augment output across runs and worker counts.
Outcome determinism()
{
    cp2m::testing::TempDir dir("accept_augment");
    cli::AugmentOptions opt;
    opt.manifest = synthetic_tiles(dir / "tiles", 8, 1000);
    opt.seed = 42;
    opt.n_samples = 50;

    std::vector<fs::path> runs;
    for (int workers : {1, 1, 8}) {
        opt.workers = workers;
        opt.out_dir = dir / ("run" + std::to_string(runs.size()));
        (void)cli::cmd_augment(opt);
        runs.push_back(opt.out_dir);
    }
    const auto files = files_under(runs[0]);
    std::size_t differing = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (files_under(runs[r]) != files) {
            ++differing;
            continue;
        }
        for (const auto& f : files) {
            differing += read_file(runs[0] / f) == read_file(runs[r] / f) ? 0 : 1;
        }
    }
    std::ostringstream d;
    d << files.size() << " png files per run, " << differing << " differences (runs: 1, 1, 8 workers)";
    return {files.size() == 100 && differing == 0, d.str()};
}

// 9. Preview panel: output row equals mosaic row outside the pasted masks.
Outcome preview()
{
    cp2m::testing::TempDir dir("accept_preview");
    cli::PreviewOptions opt;
    opt.manifest = synthetic_tiles(dir / "tiles", 4, 256);
    opt.config.out_width = 256;
    opt.config.out_height = 256;
    opt.seed = 9;
    opt.columns = 5;
    opt.out_path = dir / "panel.png";
    (void)cli::cmd_preview(opt);
    const auto panel = read_image(opt.out_path);
    const int w = opt.config.out_width;
    const int h = opt.config.out_height;
    const Rgb white{255, 255, 255};
    std::size_t violations = 0;
    std::size_t masked = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < panel.width(); ++x) {
            if (panel.at(x, 5 * h + y) == white) {
                ++masked;
                continue;
            }
            violations += panel.at(x, 6 * h + y) == panel.at(x, y) ? 0 : 1;
        }
    }
    std::ostringstream d;
    d << "panel=" << panel.width() << "x" << panel.height() << " masked_pixels=" << masked
      << " violations=" << violations;
    return {panel.width() == 5 * w && panel.height() == cli::kPreviewRows * h && masked > 0 && violations == 0,
            d.str()};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 tiling 24+14 scenes of 6000x6000 -> 864/504 tiles", tiling},
        {"2 connected components equal flood-fill oracle", ccl},
        {"3 mask compositing equals per-pixel evaluation", compositing},
        {"4 mosaic output size and half-size quadrants", mosaic_contract},
        {"5 gate rates within [0.48, 0.52] at p=0.5", gating},
        {"6 mIoU/accuracy equal set oracle; hand case 7/12, 0.75", metrics},
        {"7 CE gradient equals central differences; one-hot loss 0", gradient},
        {"8 augment seed 42, 50 samples: byte-identical, 1 vs 8 workers", determinism},
        {"9 preview row G equals row A outside row F masks", preview},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        const auto t = Clock::now();
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << " | " << seconds_since(t) << "s"
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
