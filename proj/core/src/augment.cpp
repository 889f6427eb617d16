#include "cp2m/augment.hpp"

#include "cp2m/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cp2m {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError("invalid value '" + text + "' for " + key);
    }
    return value;
}

// std::from_chars for double is not available on every toolchain we target.
double parse_double(const std::string& key, const std::string& text)
{
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double value = 0;
    char extra = 0;
    if (!(in >> value) || (in >> extra)) {
        throw ValidationError("invalid value '" + text + "' for " + key);
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw ValidationError("invalid boolean '" + text + "' for " + key);
}

std::string format_double(double v)
{
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << v;
    return out.str();
}

// Builds a W x H sample where out(x, y) = in(src(x, y)).
template <typename SourceCoord>
SamplePair remap(const SamplePair& s, int out_w, int out_h, SourceCoord&& src)
{
    ImagePlane img(out_w, out_h);
    std::vector<ClassIndex> lbl(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(out_h));
    const auto in_lbl = s.label.data();
    const auto in_w = static_cast<std::size_t>(s.width());
    for (int y = 0; y < out_h; ++y) {
        auto row = img.row(y);
        for (int x = 0; x < out_w; ++x) {
            const auto [sx, sy] = src(x, y);
            const auto c = s.image.at(sx, sy);
            row[static_cast<std::size_t>(x) * 3] = c.r;
            row[static_cast<std::size_t>(x) * 3 + 1] = c.g;
            row[static_cast<std::size_t>(x) * 3 + 2] = c.b;
            lbl[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w) + static_cast<std::size_t>(x)] =
                in_lbl[static_cast<std::size_t>(sy) * in_w + static_cast<std::size_t>(sx)];
        }
    }
    return SamplePair(std::move(img), LabelMap(out_w, out_h, s.label.num_classes(), std::move(lbl)));
}

bool covers(int w, int h, int out_w, int out_h) noexcept
{
    return w >= out_w && h >= out_h;
}

} // namespace

void AugmentConfig::validate() const
{
    if (!(p_mosaic >= 0.0 && p_mosaic <= 1.0)) {
        throw ValidationError("p_mosaic must be in [0, 1]");
    }
    if (!(p_cpm >= 0.0 && p_cpm <= 1.0)) {
        throw ValidationError("p_cpm must be in [0, 1]");
    }
    if (out_width < 2 || out_height < 2 || out_width % 2 != 0 || out_height % 2 != 0) {
        throw ValidationError("out_size must be even and at least 2 in each dimension, got " +
                              std::to_string(out_width) + "x" + std::to_string(out_height));
    }
    if (k_max < 1) {
        throw ValidationError("k_max must be at least 1");
    }
}

void AugmentConfig::set(const std::string& key, const std::string& raw)
{
    const auto value = trim(raw);
    if (key == "p_mosaic") {
        p_mosaic = parse_double(key, value);
    } else if (key == "p_cpm") {
        p_cpm = parse_double(key, value);
    } else if (key == "out_size") {
        const auto x = value.find('x');
        if (x == std::string::npos) {
            throw ValidationError("out_size must be WIDTHxHEIGHT, got '" + value + "'");
        }
        out_width = parse_number<int>(key, value.substr(0, x));
        out_height = parse_number<int>(key, value.substr(x + 1));
    } else if (key == "k_max") {
        k_max = parse_number<int>(key, value);
    } else if (key == "min_area") {
        min_area = parse_number<std::size_t>(key, value);
    } else if (key == "connectivity") {
        connectivity = parse_connectivity(value);
    } else if (key == "cpm_classes") {
        std::vector<ClassIndex> classes;
        std::istringstream in(value);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) {
                continue;
            }
            const auto c = parse_number<int>(key, item);
            if (c < 0 || c >= kMaxClasses) {
                throw ValidationError("cpm_classes entry " + item + " out of range");
            }
            classes.push_back(static_cast<ClassIndex>(c));
        }
        cpm_classes = std::move(classes);
    } else if (key == "enable_flips") {
        enable_flips = parse_bool(key, value);
    } else if (key == "enable_quarter_rotations") {
        enable_quarter_rotations = parse_bool(key, value);
    } else {
        throw ValidationError("unknown config key '" + key + "'");
    }
}

AugmentConfig AugmentConfig::parse(std::istream& in, const std::string& source_name)
{
    AugmentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ValidationError& e) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

AugmentConfig AugmentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    return parse(in, path.string());
}

std::string AugmentConfig::to_string() const
{
    std::string classes;
    for (auto c : cpm_classes) {
        classes += (classes.empty() ? "" : ",") + std::to_string(c);
    }
    std::ostringstream out;
    out << "p_mosaic = " << format_double(p_mosaic) << '\n'
        << "p_cpm = " << format_double(p_cpm) << '\n'
        << "out_size = " << out_width << 'x' << out_height << '\n'
        << "k_max = " << k_max << '\n'
        << "min_area = " << min_area << '\n'
        << "connectivity = " << cp2m::to_string(connectivity) << '\n'
        << "cpm_classes = " << classes << '\n'
        << "enable_flips = " << (enable_flips ? "true" : "false") << '\n'
        << "enable_quarter_rotations = " << (enable_quarter_rotations ? "true" : "false") << '\n';
    return out.str();
}

Patch make_patch(const SamplePair& source, const Instance& instance)
{
    return Patch{instance, source.image.crop(instance.bbox.rect()), instance.class_index};
}

SamplePair flip(const SamplePair& s, bool horizontal, bool vertical)
{
    if (!horizontal && !vertical) {
        return s;
    }
    const int w = s.width();
    const int h = s.height();
    return remap(s, w, h, [&](int x, int y) {
        return std::pair{horizontal ? w - 1 - x : x, vertical ? h - 1 - y : y};
    });
}

SamplePair rotate_quarter(const SamplePair& s, int quarter_turns)
{
    const int turns = ((quarter_turns % 4) + 4) % 4;
    const int w = s.width();
    const int h = s.height();
    switch (turns) {
    case 1:
        return remap(s, h, w, [&](int x, int y) { return std::pair{w - 1 - y, x}; });
    case 2:
        return remap(s, w, h, [&](int x, int y) { return std::pair{w - 1 - x, h - 1 - y}; });
    case 3:
        return remap(s, h, w, [&](int x, int y) { return std::pair{y, h - 1 - x}; });
    default:
        return s;
    }
}

SamplePair random_crop(const SamplePair& s, int out_w, int out_h, RngStream& rng)
{
    if (out_w < 1 || out_h < 1 || !covers(s.width(), s.height(), out_w, out_h)) {
        throw SizeError("cannot crop " + std::to_string(out_w) + "x" + std::to_string(out_h) + " from a " +
                        std::to_string(s.width()) + "x" + std::to_string(s.height()) + " sample");
    }
    const auto x = static_cast<int>(rng.uniform_int(0, s.width() - out_w));
    const auto y = static_cast<int>(rng.uniform_int(0, s.height() - out_h));
    if (x == 0 && y == 0 && out_w == s.width() && out_h == s.height()) {
        return s;
    }
    return s.crop({x, y, out_w, out_h});
}

SamplePair random_geom(const SamplePair& s, int out_w, int out_h, const AugmentConfig& cfg, RngStream& rng)
{
    const bool upright = covers(s.width(), s.height(), out_w, out_h);
    const bool sideways = covers(s.height(), s.width(), out_w, out_h);
    if (!upright && !sideways) {
        throw SizeError("sample of " + std::to_string(s.width()) + "x" + std::to_string(s.height()) +
                        " cannot cover " + std::to_string(out_w) + "x" + std::to_string(out_h));
    }

    bool flip_h = false;
    bool flip_v = false;
    if (cfg.enable_flips) {
        flip_h = rng.bernoulli(0.5);
        flip_v = rng.bernoulli(0.5);
    }
    int turns = 0;
    if (cfg.enable_quarter_rotations) {
        std::array<int, 4> allowed{};
        int n = 0;
        for (int t = 0; t < 4; ++t) {
            if (t % 2 == 0 ? upright : sideways) {
                allowed[static_cast<std::size_t>(n++)] = t;
            }
        }
        turns = allowed[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
    } else if (!upright) {
        throw SizeError("sample of " + std::to_string(s.width()) + "x" + std::to_string(s.height()) +
                        " cannot cover " + std::to_string(out_w) + "x" + std::to_string(out_h) +
                        " without rotation");
    }
    return random_crop(rotate_quarter(flip(s, flip_h, flip_v), turns), out_w, out_h, rng);
}

SamplePair mosaic(const std::array<const SamplePair*, 4>& samples, const AugmentConfig& cfg, RngStream& rng)
{
    const int half_w = cfg.out_width / 2;
    const int half_h = cfg.out_height / 2;
    int num_classes = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto* s = samples[i];
        if (s == nullptr) {
            throw ValidationError("mosaic input " + std::to_string(i + 1) + " is missing");
        }
        if (!covers(s->width(), s->height(), half_w, half_h) && !covers(s->height(), s->width(), half_w, half_h)) {
            throw SizeError("mosaic input " + std::to_string(i + 1) + " (" + std::to_string(s->width()) + "x" +
                            std::to_string(s->height()) + ") is smaller than the " + std::to_string(half_w) + "x" +
                            std::to_string(half_h) + " quadrant");
        }
        num_classes = std::max(num_classes, s->label.num_classes());
    }

    ImagePlane img(cfg.out_width, cfg.out_height);
    std::vector<ClassIndex> lbl(static_cast<std::size_t>(cfg.out_width) * static_cast<std::size_t>(cfg.out_height));
    const std::array<Offset, 4> origin{{{0, 0}, {half_w, 0}, {0, half_h}, {half_w, half_h}}};
    for (std::size_t q = 0; q < 4; ++q) {
        const auto part = random_geom(*samples[q], half_w, half_h, cfg, rng);
        const auto part_lbl = part.label.data();
        for (int y = 0; y < half_h; ++y) {
            const auto src = part.image.row(y);
            std::ranges::copy(src, img.row(origin[q].y + y).begin() + static_cast<std::ptrdiff_t>(origin[q].x) * 3);
            std::copy_n(part_lbl.begin() + static_cast<std::ptrdiff_t>(y) * half_w, half_w,
                        lbl.begin() + static_cast<std::ptrdiff_t>(origin[q].y + y) * cfg.out_width + origin[q].x);
        }
    }
    return SamplePair(std::move(img), LabelMap(cfg.out_width, cfg.out_height, num_classes, std::move(lbl)));
}

void paste_patch_in_place(SamplePair& s, const Patch& patch, Offset offset)
{
    const auto& mask = patch.instance.mask;
    if (patch.pixels.width() != mask.width() || patch.pixels.height() != mask.height()) {
        throw SizeError("patch pixels and mask disagree on dimensions");
    }
    if (patch.class_index >= s.label.num_classes()) {
        throw RangeError("patch class " + std::to_string(patch.class_index) + " outside the canvas's " +
                         std::to_string(s.label.num_classes()) + " classes");
    }
    if (offset.x < 0 || offset.y < 0 || offset.x + mask.width() > s.width() ||
        offset.y + mask.height() > s.height()) {
        throw PlacementError("patch of " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                             " at (" + std::to_string(offset.x) + "," + std::to_string(offset.y) +
                             ") leaves the " + std::to_string(s.width()) + "x" + std::to_string(s.height()) +
                             " canvas");
    }
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                s.image.set(offset.x + x, offset.y + y, patch.pixels.at(x, y));
                s.label.set(offset.x + x, offset.y + y, patch.class_index);
            }
        }
    }
}

SamplePair paste_patch(const SamplePair& s, const Patch& patch, Offset offset)
{
    SamplePair out = s;
    paste_patch_in_place(out, patch, offset);
    return out;
}

CpmTrace cpm_traced(const SamplePair& s, const SamplePair& source, const AugmentConfig& cfg, RngStream& rng)
{
    if (s.label.num_classes() != source.label.num_classes()) {
        throw SizeError("patch source has " + std::to_string(source.label.num_classes()) +
                        " classes but the canvas has " + std::to_string(s.label.num_classes()));
    }
    if (!covers(source.width(), source.height(), s.width(), s.height()) &&
        !covers(source.height(), source.width(), s.width(), s.height())) {
        throw SizeError("patch source of " + std::to_string(source.width()) + "x" + std::to_string(source.height()) +
                        " cannot cover the " + std::to_string(s.width()) + "x" + std::to_string(s.height()) +
                        " canvas");
    }

    CpmTrace trace;
    trace.source = random_geom(source, s.width(), s.height(), cfg, rng);

    std::vector<ClassIndex> classes;
    for (auto c : cfg.cpm_classes) {
        if (c < s.label.num_classes()) {
            classes.push_back(c);
        }
    }
    trace.instances = extract_instances(trace.source.label, classes, cfg.connectivity, cfg.min_area);
    trace.result = s;
    const auto available = trace.instances.size();
    if (available == 0) {
        return trace;
    }

    const auto k_hi = std::min<std::size_t>(static_cast<std::size_t>(cfg.k_max), available);
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(k_hi)));

    // Partial Fisher-Yates: the first k slots become a uniform draw without replacement.
    std::vector<std::size_t> order(available);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(available - 1)));
        std::swap(order[i], order[j]);
    }

    for (std::size_t i = 0; i < k; ++i) {
        const auto& inst = trace.instances[order[i]];
        if (inst.bbox.width() > s.width() || inst.bbox.height() > s.height()) {
            continue;
        }
        const Offset at{static_cast<int>(rng.uniform_int(0, s.width() - inst.bbox.width())),
                        static_cast<int>(rng.uniform_int(0, s.height() - inst.bbox.height()))};
        paste_patch_in_place(trace.result, make_patch(trace.source, inst), at);
        trace.chosen.push_back(order[i]);
        trace.offsets.push_back(at);
    }
    return trace;
}

SamplePair cpm(const SamplePair& s, const SamplePair& source, const AugmentConfig& cfg, RngStream& rng)
{
    return cpm_traced(s, source, cfg, rng).result;
}

Cp2mTrace cp2m_traced(const SampleSource& sampler, const AugmentConfig& cfg, RngStream& rng)
{
    cfg.validate();
    Cp2mTrace trace;
    trace.mosaic_applied = rng.uniform01() < cfg.p_mosaic;
    if (trace.mosaic_applied) {
        std::array<SamplePair, 4> parts;
        for (auto& p : parts) {
            p = sampler.draw(rng);
        }
        trace.base = mosaic({&parts[0], &parts[1], &parts[2], &parts[3]}, cfg, rng);
    } else {
        trace.base = random_geom(sampler.draw(rng), cfg.out_width, cfg.out_height, cfg, rng);
    }

    trace.cpm_applied = rng.uniform01() < cfg.p_cpm;
    if (trace.cpm_applied) {
        const auto source = sampler.draw(rng);
        trace.cpm = cpm_traced(trace.base, source, cfg, rng);
        trace.result = trace.cpm->result;
    } else {
        trace.result = trace.base;
    }
    return trace;
}

SamplePair cp2m(const SampleSource& sampler, const AugmentConfig& cfg, RngStream& rng)
{
    return std::move(cp2m_traced(sampler, cfg, rng).result);
}

} // namespace cp2m
