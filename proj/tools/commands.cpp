#include "commands.hpp"

#include <cp2m/error.hpp>
#include <cp2m/png_io.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace cp2m::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(0..n-1) on up to `workers` threads. The exception of the lowest
// failing index is rethrown once all threads stop.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mutex;
    std::exception_ptr first_error;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();

    auto body = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= n || failed.load()) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
                failed = true;
            }
        }
    };

    const auto threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(body);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

void make_dirs(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string exact(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string numbered(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "aug_%06zu.png", i);
    return buf;
}

} // namespace

void RunReport::set(const std::string& key, const std::string& value)
{
    for (auto& [k, v] : values) {
        if (k == key) {
            v = value;
            return;
        }
    }
    values.emplace_back(key, value);
}

std::string RunReport::get(const std::string& key) const
{
    for (const auto& [k, v] : values) {
        if (k == key) {
            return v;
        }
    }
    return {};
}

void RunReport::add_stage(const std::string& name, double seconds)
{
    stage_seconds.emplace_back(name, seconds);
}

std::string RunReport::to_text() const
{
    std::ostringstream out;
    out << command << ": " << (ok() ? "ok" : "FAILED") << '\n';
    std::vector<std::pair<std::string, std::string>> rows{{"seed", std::to_string(seed)},
                                                          {"scheduled", std::to_string(scheduled)},
                                                          {"inputs", std::to_string(inputs)},
                                                          {"outputs", std::to_string(outputs)},
                                                          {"skipped", std::to_string(skipped)}};
    rows.insert(rows.end(), values.begin(), values.end());
    rows.emplace_back("wall time", fixed(wall_seconds, 3) + " s");
    std::size_t width = 0;
    for (const auto& row : rows) {
        width = std::max(width, row.first.size());
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        out << "  " << rows[i].first << std::string(width + 2 - rows[i].first.size(), ' ') << rows[i].second << '\n';
    }
    if (!config_snapshot.empty()) {
        out << "  config:\n";
        std::istringstream lines(config_snapshot);
        for (std::string line; std::getline(lines, line);) {
            out << "    " << line << '\n';
        }
    }
    for (const auto& e : errors) {
        out << "  error: " << e << '\n';
    }
    out << "  " << rows.back().first << std::string(width + 2 - rows.back().first.size(), ' ') << rows.back().second
        << '\n';
    for (const auto& [name, s] : stage_seconds) {
        out << "    " << name << ": " << fixed(s, 3) << " s\n";
    }
    return out.str();
}

std::string RunReport::to_key_values() const
{
    std::ostringstream out;
    out << "command=" << command << '\n'
        << "status=" << (ok() ? "ok" : "failed") << '\n'
        << "seed=" << seed << '\n'
        << "scheduled=" << scheduled << '\n'
        << "inputs=" << inputs << '\n'
        << "outputs=" << outputs << '\n'
        << "skipped=" << skipped << '\n';
    for (const auto& [k, v] : values) {
        out << k << '=' << v << '\n';
    }
    std::istringstream lines(config_snapshot);
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) {
            out << "config." << line.substr(0, eq) << '=' << line.substr(eq + 3) << '\n';
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        out << "error." << i << '=' << errors[i] << '\n';
    }
    out << "wall_seconds=" << fixed(wall_seconds, 6) << '\n';
    for (const auto& [name, s] : stage_seconds) {
        out << "stage_seconds." << name << '=' << fixed(s, 6) << '\n';
    }
    return out.str();
}

int default_workers()
{
    if (const char* env = std::getenv("CP2M_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != nullptr && *end == '\0' && v >= 1 && v <= 1024) {
            return static_cast<int>(v);
        }
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

RunReport cmd_tile(const TileOptions& opt)
{
    const auto start = Clock::now();
    RunReport report;
    report.command = "tile";
    opt.spec.validate();

    auto t = Clock::now();
    const auto manifest = load_manifest(opt.manifest);
    const auto cmap = manifest.load_colormap();
    report.add_stage("load_manifest", seconds_since(t));

    std::set<std::string> names;
    for (const auto& e : manifest.entries) {
        if (!names.insert(e.image.stem().string()).second) {
            throw ValidationError("two scenes share the name '" + e.image.stem().string() +
                                  "'; tile names would collide");
        }
    }

    make_dirs(opt.out_dir / "images");
    make_dirs(opt.out_dir / "labels");

    const auto n = manifest.entries.size();
    std::vector<std::vector<ManifestEntry>> per_scene(n);
    report.scheduled = n;
    t = Clock::now();
    parallel_for(n, opt.workers, [&](std::size_t i) {
        const auto& entry = manifest.entries[i];
        const auto scene = load_sample(manifest, entry, cmap);
        if (scene.width() < opt.spec.window_w || scene.height() < opt.spec.window_h) {
            throw SizeError(manifest.resolve(entry.image).string() + " (" + std::to_string(scene.width()) + "x" +
                            std::to_string(scene.height()) + ") is smaller than the window");
        }
        const auto stem = entry.image.stem().string();
        for (const auto& o : tile_offsets(scene.width(), scene.height(), opt.spec)) {
            const int row = o.y / opt.spec.stride_y;
            const int col = o.x / opt.spec.stride_x;
            const auto name = stem + "_r" + std::to_string(row) + "_c" + std::to_string(col) + ".png";
            const auto piece = scene.crop({o.x, o.y, opt.spec.window_w, opt.spec.window_h});
            write_image(opt.out_dir / "images" / name, piece.image);
            write_image(opt.out_dir / "labels" / name, color_from_label(piece.label, cmap));
            per_scene[i].push_back({entry.split, fs::path("images") / name, fs::path("labels") / name});
        }
    });
    report.add_stage("tile_and_write", seconds_since(t));

    Manifest tiles;
    tiles.base_dir = opt.out_dir;
    tiles.colormap = "colormap.txt";
    std::size_t train = 0;
    std::size_t test = 0;
    for (auto& scene : per_scene) {
        for (auto& e : scene) {
            (e.split == Split::train ? train : test) += 1;
            tiles.entries.push_back(std::move(e));
        }
    }
    cmap.save(opt.out_dir / "colormap.txt");
    save_manifest(tiles, opt.out_dir / "manifest.txt");

    report.inputs = n;
    report.outputs = tiles.entries.size();
    report.set("window", std::to_string(opt.spec.window_w) + "x" + std::to_string(opt.spec.window_h));
    report.set("stride", std::to_string(opt.spec.stride_x) + "x" + std::to_string(opt.spec.stride_y));
    report.set("train_tiles", std::to_string(train));
    report.set("test_tiles", std::to_string(test));
    report.wall_seconds = seconds_since(start);
    write_text(opt.out_dir / "report.txt", report.to_key_values());
    return report;
}

RunReport cmd_augment(const AugmentOptions& opt)
{
    const auto start = Clock::now();
    RunReport report;
    report.command = "augment";
    report.seed = opt.seed;
    opt.config.validate();
    report.config_snapshot = opt.config.to_string();

    auto t = Clock::now();
    const auto manifest = load_manifest(opt.manifest);
    const ManifestSource source(manifest, Split::train);
    report.add_stage("load_manifest", seconds_since(t));

    make_dirs(opt.out_dir / "images");
    make_dirs(opt.out_dir / "labels");

    const auto n = opt.n_samples;
    report.scheduled = n;
    std::vector<std::uint8_t> mosaic_flags(n, 0);
    std::vector<std::uint8_t> cpm_flags(n, 0);
    t = Clock::now();
    parallel_for(n, opt.workers, [&](std::size_t i) {
        auto rng = RngStream::for_sample(opt.seed, i);
        const auto trace = cp2m_traced(source, opt.config, rng);
        mosaic_flags[i] = trace.mosaic_applied ? 1 : 0;
        cpm_flags[i] = trace.cpm_applied ? 1 : 0;
        const auto name = numbered(i);
        write_image(opt.out_dir / "images" / name, trace.result.image);
        write_image(opt.out_dir / "labels" / name, color_from_label(trace.result.label, source.colormap()));
    });
    report.add_stage("augment_and_write", seconds_since(t));

    Manifest out;
    out.base_dir = opt.out_dir;
    out.colormap = "colormap.txt";
    for (std::size_t i = 0; i < n; ++i) {
        out.entries.push_back({Split::train, fs::path("images") / numbered(i), fs::path("labels") / numbered(i)});
    }
    source.colormap().save(opt.out_dir / "colormap.txt");
    save_manifest(out, opt.out_dir / "manifest.txt");

    report.inputs = source.size();
    report.outputs = n;
    report.set("mosaic_applied", std::to_string(std::ranges::count(mosaic_flags, 1)));
    report.set("cpm_applied", std::to_string(std::ranges::count(cpm_flags, 1)));
    report.wall_seconds = seconds_since(start);
    write_text(opt.out_dir / "report.txt", report.to_key_values());
    return report;
}

Rgb instance_color(std::uint32_t id) noexcept
{
    if (id == 0) {
        return {};
    }
    // Golden-ratio hue walk; fixed saturation and value.
    const double h = std::fmod(static_cast<double>(id) * 0.61803398874989485, 1.0) * 6.0;
    const double s = 0.85;
    const double v = 0.95;
    const int sector = static_cast<int>(h);
    const double f = h - sector;
    const double p = v * (1 - s);
    const double q = v * (1 - s * f);
    const double u = v * (1 - s * (1 - f));
    double r = v, g = u, b = p;
    switch (sector) {
    case 0: r = v; g = u; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = u; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = u; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
    }
    auto to8 = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

ImagePlane render_preview(const SampleSource& source, const ColorMap& cmap, const AugmentConfig& config,
                          std::uint64_t seed, std::size_t columns)
{
    if (columns == 0) {
        throw ValidationError("preview needs at least one column");
    }
    auto cfg = config;
    cfg.p_mosaic = 1.0;
    cfg.p_cpm = 1.0;
    cfg.validate();

    const int w = cfg.out_width;
    const int h = cfg.out_height;
    ImagePlane panel(w * static_cast<int>(columns), h * kPreviewRows);
    auto blit = [&](const ImagePlane& img, std::size_t col, int row) {
        for (int y = 0; y < h; ++y) {
            const auto src = img.row(y);
            std::ranges::copy(src, panel.row(row * h + y).begin() + static_cast<std::ptrdiff_t>(col) * w * 3);
        }
    };

    for (std::size_t c = 0; c < columns; ++c) {
        auto rng = RngStream::for_sample(seed, c);
        const auto trace = cp2m_traced(source, cfg, rng);
        const auto& mix = *trace.cpm;

        ImagePlane instances(w, h);
        for (std::size_t j = 0; j < mix.instances.size(); ++j) {
            const auto& inst = mix.instances[j];
            const auto color = instance_color(static_cast<std::uint32_t>(j + 1));
            for (int y = 0; y < inst.mask.height(); ++y) {
                for (int x = 0; x < inst.mask.width(); ++x) {
                    if (inst.mask.at(x, y)) {
                        instances.set(inst.bbox.min_x + x, inst.bbox.min_y + y, color);
                    }
                }
            }
        }

        ImagePlane masks(w, h);
        for (std::size_t j = 0; j < mix.chosen.size(); ++j) {
            const auto& inst = mix.instances[mix.chosen[j]];
            const auto at = mix.offsets[j];
            for (int y = 0; y < inst.mask.height(); ++y) {
                for (int x = 0; x < inst.mask.width(); ++x) {
                    if (inst.mask.at(x, y)) {
                        masks.set(at.x + x, at.y + y, {255, 255, 255});
                    }
                }
            }
        }

        blit(trace.base.image, c, 0);
        blit(color_from_label(trace.base.label, cmap), c, 1);
        blit(mix.source.image, c, 2);
        blit(color_from_label(mix.source.label, cmap), c, 3);
        blit(instances, c, 4);
        blit(masks, c, 5);
        blit(trace.result.image, c, 6);
        blit(color_from_label(trace.result.label, cmap), c, 7);
    }
    return panel;
}

RunReport cmd_preview(const PreviewOptions& opt)
{
    const auto start = Clock::now();
    RunReport report;
    report.command = "preview";
    report.seed = opt.seed;
    report.config_snapshot = opt.config.to_string();

    const auto manifest = load_manifest(opt.manifest);
    const ManifestSource source(manifest, Split::train);
    auto t = Clock::now();
    const auto panel = render_preview(source, source.colormap(), opt.config, opt.seed, opt.columns);
    report.add_stage("render", seconds_since(t));

    if (const auto dir = opt.out_path.parent_path(); !dir.empty()) {
        make_dirs(dir);
    }
    write_image(opt.out_path, panel);

    report.scheduled = opt.columns;
    report.inputs = source.size();
    report.outputs = 1;
    report.set("columns", std::to_string(opt.columns));
    report.set("rows", "A,B,C,D,E,F,G,H");
    report.set("panel", std::to_string(panel.width()) + "x" + std::to_string(panel.height()));
    report.wall_seconds = seconds_since(start);
    return report;
}

std::string format_metrics(const ConfusionMatrix& cm)
{
    const auto per_class = iou_per_class(cm);
    const double acc = pixel_accuracy(cm);
    const double mean = miou(cm);

    std::ostringstream out;
    auto cell = [&](const std::string& s) { out << std::string(s.size() < 9 ? 9 - s.size() : 1, ' ') << s; };
    cell("Accuracy");
    cell("mIoU");
    for (int c = 0; c < cm.num_classes(); ++c) {
        cell("C" + std::to_string(c + 1));
    }
    out << '\n';
    cell(fixed(acc * 100.0, 2));
    cell(fixed(mean * 100.0, 2));
    for (std::size_t c = 0; c < per_class.iou.size(); ++c) {
        cell(per_class.present[c] ? fixed(per_class.iou[c] * 100.0, 2) : "-");
    }
    out << "\n\n";
    out << "accuracy=" << exact(acc) << '\n';
    out << "miou=" << exact(mean) << '\n';
    for (std::size_t c = 0; c < per_class.iou.size(); ++c) {
        out << "iou.C" << c + 1 << '=' << (per_class.present[c] ? exact(per_class.iou[c]) : "absent") << '\n';
    }
    return out.str();
}

EvalResult cmd_eval(const EvalOptions& opt)
{
    const auto start = Clock::now();
    EvalResult result;
    auto& report = result.report;
    report.command = "eval";

    const auto manifest = load_manifest(opt.gt_manifest);
    const auto cmap = opt.colormap ? ColorMap::load(*opt.colormap) : manifest.load_colormap();
    const auto entries = manifest.split(opt.split);
    if (entries.empty()) {
        throw EmptySplitError(std::string("the ") + std::string(to_string(opt.split)) +
                              " split of the ground-truth manifest is empty");
    }

    std::vector<std::string> missing;
    for (const auto& e : entries) {
        const auto pred = opt.pred_dir / e.label.filename();
        if (!fs::is_regular_file(pred)) {
            missing.push_back(pred.string());
        }
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " prediction(s) missing:";
        for (const auto& m : missing) {
            msg += "\n  " + m;
        }
        throw ValidationError(msg);
    }

    const auto n = entries.size();
    report.scheduled = n;
    std::vector<std::optional<ConfusionMatrix>> parts(n);
    std::vector<std::string> file_errors(n);
    auto t = Clock::now();
    parallel_for(n, opt.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        const auto pred_path = opt.pred_dir / e.label.filename();
        try {
            const auto gt = label_from_color(read_image(manifest.resolve(e.label)), cmap);
            const auto pred = label_from_color(read_image(pred_path), cmap);
            if (pred.width() != gt.width() || pred.height() != gt.height()) {
                throw SizeError("prediction is " + std::to_string(pred.width()) + "x" +
                                std::to_string(pred.height()) + " but ground truth is " +
                                std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
            }
            parts[i] = confusion(pred, gt, cmap.size(), opt.ignore_index);
        } catch (const Error& err) {
            file_errors[i] = pred_path.string() + ": " + err.what();
        }
    });
    report.add_stage("evaluate", seconds_since(t));

    result.matrix = ConfusionMatrix(cmap.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (parts[i]) {
            result.matrix += *parts[i];
            ++report.outputs;
        } else {
            report.errors.push_back(file_errors[i]);
            ++report.skipped;
        }
    }
    report.inputs = n;
    report.set("pixels", std::to_string(result.matrix.total()));
    if (result.matrix.total() > 0) {
        result.table = format_metrics(result.matrix);
        report.set("accuracy", exact(pixel_accuracy(result.matrix)));
        report.set("miou", exact(miou(result.matrix)));
    }
    report.wall_seconds = seconds_since(start);
    return result;
}

} // namespace cp2m::cli
