#pragma once

#include "cp2m/raster.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace cp2m {

struct ColorEntry {
    ClassIndex index = 0;
    Rgb color;
    std::string name;

    friend bool operator==(const ColorEntry&, const ColorEntry&) = default;
};

/// Bijection between class indices 0..C-1 and RGB colors.
///
/// On disk a colormap is a text file with one line per class:
///
///     <index> <name> <r> <g> <b>
///
/// Blank lines and lines starting with '#' are ignored. Indices must be
/// contiguous from 0 (in any line order) and colors pairwise distinct.
class ColorMap {
public:
    ColorMap() = default;
    /// Entries are sorted by index; throws ValidationError on gaps, duplicates or repeated colors.
    explicit ColorMap(std::vector<ColorEntry> entries);

    static ColorMap parse(std::istream& in, const std::string& source_name = "<stream>");
    static ColorMap load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    [[nodiscard]] std::string to_string() const;

    /// The six ISPRS Potsdam classes with the dataset's published label colors.
    static ColorMap potsdam();

    [[nodiscard]] int size() const noexcept { return static_cast<int>(entries_.size()); }
    [[nodiscard]] const std::vector<ColorEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const ColorEntry& operator[](ClassIndex c) const { return entries_.at(c); }

    [[nodiscard]] std::optional<ClassIndex> find(Rgb color) const noexcept;

    friend bool operator==(const ColorMap&, const ColorMap&) = default;

private:
    std::vector<ColorEntry> entries_;
    // Sorted by color for lookup.
    std::vector<std::pair<Rgb, ClassIndex>> by_color_;
};

/// Converts a color-coded label raster to class indices.
///
/// Pixels whose color is absent from `cmap` are assigned `fallback` when set;
/// otherwise UnmappedColorError is thrown naming every offending color and the
/// first pixel where it occurs.
[[nodiscard]] LabelMap label_from_color(const ImagePlane& img, const ColorMap& cmap,
                                        std::optional<ClassIndex> fallback = std::nullopt);

/// Substitutes each class index with its color. Throws RangeError for indices >= cmap.size().
[[nodiscard]] ImagePlane color_from_label(const LabelMap& lbl, const ColorMap& cmap);

} // namespace cp2m
