#include "cp2m/dataset.hpp"

#include "cp2m/error.hpp"
#include "cp2m/png_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace cp2m {

std::string_view to_string(Split s) noexcept
{
    return s == Split::train ? "train" : "test";
}

Split parse_split(std::string_view text)
{
    if (text == "train") {
        return Split::train;
    }
    if (text == "test") {
        return Split::test;
    }
    throw ValidationError("unknown split '" + std::string(text) + "' (expected train or test)");
}

fs::path Manifest::resolve(const fs::path& p) const
{
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
}

std::vector<ManifestEntry> Manifest::split(Split s) const
{
    std::vector<ManifestEntry> out;
    for (const auto& e : entries) {
        if (e.split == s) {
            out.push_back(e);
        }
    }
    return out;
}

ColorMap Manifest::load_colormap() const
{
    if (colormap.empty()) {
        throw ValidationError("manifest does not name a colormap");
    }
    return ColorMap::load(resolve(colormap));
}

void Manifest::validate() const
{
    std::vector<std::string> problems;
    std::set<fs::path> seen;
    auto check = [&](const fs::path& p, const char* what) {
        const auto full = resolve(p);
        if (!seen.insert(full).second) {
            problems.push_back("duplicate path " + p.string());
        }
        if (!fs::is_regular_file(full)) {
            problems.push_back(std::string("missing ") + what + " " + full.string());
        }
    };
    if (colormap.empty()) {
        problems.emplace_back("no colormap line");
    } else if (!fs::is_regular_file(resolve(colormap))) {
        problems.push_back("missing colormap " + resolve(colormap).string());
    }
    for (const auto& e : entries) {
        check(e.image, "image");
        check(e.label, "label");
    }
    if (!problems.empty()) {
        std::string msg = "manifest validation failed:";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        throw ValidationError(msg);
    }
}

Manifest parse_manifest(std::string_view text, const fs::path& base_dir, const std::string& source_name)
{
    Manifest m;
    m.base_dir = base_dir;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string head;
        std::string a;
        std::string b;
        std::string extra;
        fields >> head;
        const auto where = source_name + ":" + std::to_string(line_no) + ": ";
        if (head == "colormap") {
            if (!(fields >> a) || (fields >> extra)) {
                throw ValidationError(where + "expected 'colormap <path>'");
            }
            if (!m.colormap.empty()) {
                throw ValidationError(where + "second colormap line");
            }
            m.colormap = a;
            continue;
        }
        if (!(fields >> a >> b) || (fields >> extra)) {
            throw ValidationError(where + "expected '<split> <image_path> <label_path>'");
        }
        try {
            m.entries.push_back({parse_split(head), fs::path(a), fs::path(b)});
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    if (m.colormap.empty()) {
        throw ValidationError(source_name + ": missing 'colormap <path>' line");
    }
    return m;
}

Manifest load_manifest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) {
        base = ".";
    }
    auto m = parse_manifest(text.str(), base, path.string());
    m.validate();
    return m;
}

void save_manifest(const Manifest& m, const fs::path& path)
{
    auto dir = path.parent_path();
    if (dir.empty()) {
        dir = ".";
    }
    const auto target = fs::absolute(dir).lexically_normal();
    auto rel = [&](const fs::path& p) {
        const auto full = fs::absolute(m.resolve(p)).lexically_normal();
        auto r = full.lexically_relative(target);
        return (r.empty() ? full : r).generic_string();
    };
    std::ostringstream out;
    out << "colormap " << rel(m.colormap) << '\n';
    for (const auto& e : m.entries) {
        out << to_string(e.split) << ' ' << rel(e.image) << ' ' << rel(e.label) << '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << out.str();
    if (!f) {
        throw IoError("cannot write manifest " + path.string());
    }
}

void TileSpec::validate() const
{
    if (window_w < 1 || window_h < 1) {
        throw ValidationError("tile window must be at least 1x1");
    }
    if (stride_x < 1 || stride_y < 1) {
        throw ValidationError("tile stride must be at least 1");
    }
}

std::size_t tile_count(int width, int height, const TileSpec& spec)
{
    spec.validate();
    if (width < spec.window_w || height < spec.window_h) {
        return 0;
    }
    const auto cols = static_cast<std::size_t>((width - spec.window_w) / spec.stride_x) + 1;
    const auto rows = static_cast<std::size_t>((height - spec.window_h) / spec.stride_y) + 1;
    return cols * rows;
}

std::vector<Offset> tile_offsets(int width, int height, const TileSpec& spec)
{
    spec.validate();
    std::vector<Offset> out;
    for (int y = 0; y + spec.window_h <= height; y += spec.stride_y) {
        for (int x = 0; x + spec.window_w <= width; x += spec.stride_x) {
            out.push_back({x, y});
        }
    }
    return out;
}

std::vector<SamplePair> tile(const SamplePair& scene, const TileSpec& spec)
{
    spec.validate();
    if (scene.width() < spec.window_w || scene.height() < spec.window_h) {
        throw SizeError("scene of " + std::to_string(scene.width()) + "x" + std::to_string(scene.height()) +
                        " is smaller than the " + std::to_string(spec.window_w) + "x" +
                        std::to_string(spec.window_h) + " window");
    }
    std::vector<SamplePair> out;
    for (const auto& o : tile_offsets(scene.width(), scene.height(), spec)) {
        out.push_back(scene.crop({o.x, o.y, spec.window_w, spec.window_h}));
    }
    return out;
}

SamplePair load_sample(const Manifest& m, const ManifestEntry& e, const ColorMap& cmap)
{
    auto image = read_image(m.resolve(e.image));
    const auto label_pixels = read_image(m.resolve(e.label));
    try {
        return SamplePair(std::move(image), label_from_color(label_pixels, cmap));
    } catch (const Error& err) {
        throw ValidationError(m.resolve(e.label).string() + ": " + err.what());
    }
}

std::size_t sample_index(std::size_t split_size, RngStream& rng)
{
    if (split_size == 0) {
        throw EmptySplitError("cannot sample from an empty split");
    }
    return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(split_size) - 1));
}

SamplePair sample(const Manifest& m, Split split, std::uint64_t index, std::uint64_t seed)
{
    const auto entries = m.split(split);
    if (entries.empty()) {
        throw EmptySplitError(std::string("the ") + std::string(to_string(split)) + " split is empty");
    }
    auto rng = RngStream::for_sample(seed, index);
    return load_sample(m, entries[sample_index(entries.size(), rng)], m.load_colormap());
}

ManifestSource::ManifestSource(Manifest manifest, Split split)
    : manifest_(std::move(manifest)), cmap_(manifest_.load_colormap()), entries_(manifest_.split(split))
{
    if (entries_.empty()) {
        throw EmptySplitError(std::string("the ") + std::string(to_string(split)) + " split is empty");
    }
}

SamplePair ManifestSource::draw(RngStream& rng) const
{
    return load_sample(manifest_, entries_[sample_index(entries_.size(), rng)], cmap_);
}

InMemorySource::InMemorySource(std::vector<SamplePair> samples) : samples_(std::move(samples))
{
    if (samples_.empty()) {
        throw EmptySplitError("in-memory source has no samples");
    }
}

SamplePair InMemorySource::draw(RngStream& rng) const
{
    return samples_[sample_index(samples_.size(), rng)];
}

} // namespace cp2m
