#include "cp2m/colormap.hpp"

#include "cp2m/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace cp2m {

namespace {

std::string format_rgb(Rgb c)
{
    return "(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b) + ")";
}

std::uint32_t pack(Rgb c) noexcept
{
    return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b;
}

} // namespace

ColorMap::ColorMap(std::vector<ColorEntry> entries) : entries_(std::move(entries))
{
    if (entries_.empty()) {
        throw ValidationError("colormap has no entries");
    }
    if (entries_.size() > static_cast<std::size_t>(kMaxClasses)) {
        throw ValidationError("colormap has more than 256 entries");
    }
    std::ranges::sort(entries_, {}, &ColorEntry::index);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].index != i) {
            if (i > 0 && entries_[i].index == entries_[i - 1].index) {
                throw ValidationError("colormap index " + std::to_string(entries_[i].index) + " appears twice");
            }
            throw ValidationError("colormap indices must be contiguous from 0; missing index " + std::to_string(i));
        }
        by_color_.emplace_back(entries_[i].color, entries_[i].index);
    }
    std::ranges::sort(by_color_);
    for (std::size_t i = 1; i < by_color_.size(); ++i) {
        if (by_color_[i].first == by_color_[i - 1].first) {
            throw ValidationError("colormap color " + format_rgb(by_color_[i].first) + " used by classes " +
                                  std::to_string(by_color_[i - 1].second) + " and " +
                                  std::to_string(by_color_[i].second));
        }
    }
}

ColorMap ColorMap::parse(std::istream& in, const std::string& source_name)
{
    std::vector<ColorEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream fields(line);
        int index = -1;
        std::string name;
        int r = -1, g = -1, b = -1;
        std::string extra;
        if (!(fields >> index >> name >> r >> g >> b) || (fields >> extra)) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                  ": expected '<index> <name> <r> <g> <b>'");
        }
        if (index < 0 || index >= kMaxClasses) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) + ": index out of range");
        }
        for (int v : {r, g, b}) {
            if (v < 0 || v > 255) {
                throw ValidationError(source_name + ":" + std::to_string(line_no) + ": color channel out of range");
            }
        }
        entries.push_back({static_cast<ClassIndex>(index),
                           {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)},
                           name});
    }
    try {
        return ColorMap(std::move(entries));
    } catch (const ValidationError& e) {
        throw ValidationError(source_name + ": " + e.what());
    }
}

ColorMap ColorMap::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open colormap " + path.string());
    }
    return parse(in, path.string());
}

std::string ColorMap::to_string() const
{
    std::ostringstream out;
    for (const auto& e : entries_) {
        out << int{e.index} << ' ' << e.name << ' ' << int{e.color.r} << ' ' << int{e.color.g} << ' '
            << int{e.color.b} << '\n';
    }
    return out.str();
}

void ColorMap::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    out << to_string();
    if (!out) {
        throw IoError("cannot write colormap " + path.string());
    }
}

ColorMap ColorMap::potsdam()
{
    return ColorMap({
        {0, {255, 255, 255}, "impervious_surfaces"},
        {1, {0, 0, 255}, "building"},
        {2, {0, 255, 255}, "low_vegetation"},
        {3, {0, 255, 0}, "tree"},
        {4, {255, 255, 0}, "car"},
        {5, {255, 0, 0}, "clutter"},
    });
}

std::optional<ClassIndex> ColorMap::find(Rgb color) const noexcept
{
    const auto it = std::ranges::lower_bound(by_color_, color, {}, &std::pair<Rgb, ClassIndex>::first);
    if (it == by_color_.end() || it->first != color) {
        return std::nullopt;
    }
    return it->second;
}

LabelMap label_from_color(const ImagePlane& img, const ColorMap& cmap, std::optional<ClassIndex> fallback)
{
    if (fallback && *fallback >= cmap.size()) {
        throw RangeError("fallback class " + std::to_string(*fallback) + " is not in the colormap");
    }
    const auto width = img.width();
    const auto height = img.height();
    std::vector<ClassIndex> out(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));

    // Offending color -> first pixel (x, y), ordered by color for a stable message.
    std::map<std::uint32_t, std::pair<int, int>> unmapped;

    // Label rasters are dominated by long runs of one color; remember the last hit.
    std::uint32_t last_key = 0xFFFFFFFF;
    ClassIndex last_class = 0;
    bool last_ok = false;

    const auto px = img.data();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
            const Rgb c{px[i * 3], px[i * 3 + 1], px[i * 3 + 2]};
            const auto key = pack(c);
            if (key != last_key) {
                last_key = key;
                const auto found = cmap.find(c);
                last_ok = found.has_value() || fallback.has_value();
                last_class = found ? *found : fallback.value_or(0);
                if (!last_ok) {
                    unmapped.try_emplace(key, x, y);
                }
            }
            out[i] = last_class;
        }
    }
    if (!unmapped.empty()) {
        std::string msg = "label raster contains " + std::to_string(unmapped.size()) + " color(s) not in the colormap:";
        constexpr std::size_t kMaxListed = 16;
        std::size_t listed = 0;
        for (const auto& [key, where] : unmapped) {
            if (listed++ == kMaxListed) {
                msg += " ...";
                break;
            }
            msg += " " + format_rgb({static_cast<std::uint8_t>(key >> 16), static_cast<std::uint8_t>(key >> 8),
                                     static_cast<std::uint8_t>(key)}) +
                   " at (" + std::to_string(where.first) + "," + std::to_string(where.second) + ")";
        }
        throw UnmappedColorError(msg);
    }
    return LabelMap(width, height, cmap.size(), std::move(out));
}

ImagePlane color_from_label(const LabelMap& lbl, const ColorMap& cmap)
{
    if (lbl.num_classes() > cmap.size()) {
        // Only an error if an index actually exceeds the map.
        const auto data = lbl.data();
        const auto bad = std::ranges::find_if(data, [&](ClassIndex c) { return c >= cmap.size(); });
        if (bad != data.end()) {
            throw RangeError("class " + std::to_string(*bad) + " has no colormap entry (colormap has " +
                             std::to_string(cmap.size()) + " classes)");
        }
    }
    ImagePlane out(lbl.width(), lbl.height());
    auto dst = out.data();
    const auto src = lbl.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto c = cmap.entries()[src[i]].color;
        dst[i * 3] = c.r;
        dst[i * 3 + 1] = c.g;
        dst[i * 3 + 2] = c.b;
    }
    return out;
}

} // namespace cp2m
