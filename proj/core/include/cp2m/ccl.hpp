#pragma once

#include "cp2m/raster.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cp2m {

enum class Connectivity { four, eight };

[[nodiscard]] std::string_view to_string(Connectivity c) noexcept;
/// Accepts "4" or "8"; throws ValidationError otherwise.
[[nodiscard]] Connectivity parse_connectivity(std::string_view text);

/// Row-major 0/1 raster.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    /// Any nonzero byte is treated as 1.
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v) noexcept { bits_[index(x, y)] = v ? 1 : 0; }
    [[nodiscard]] std::span<const std::uint8_t> data() const noexcept { return bits_; }
    [[nodiscard]] std::size_t popcount() const noexcept;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel component IDs: 0 for background, 1..count for foreground.
struct InstanceMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> ids;
    std::uint32_t count = 0;

    [[nodiscard]] std::uint32_t at(int x, int y) const noexcept
    {
        return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }

    friend bool operator==(const InstanceMap&, const InstanceMap&) = default;
};

/// Inclusive pixel bounds.
struct BoundingBox {
    int min_x = 0;
    int min_y = 0;
    int max_x = 0;
    int max_y = 0;

    [[nodiscard]] int width() const noexcept { return max_x - min_x + 1; }
    [[nodiscard]] int height() const noexcept { return max_y - min_y + 1; }
    [[nodiscard]] Rect rect() const noexcept { return {min_x, min_y, width(), height()}; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One connected component of one class.
struct Instance {
    std::uint32_t id = 0;
    ClassIndex class_index = 0;
    std::size_t area = 0;
    BoundingBox bbox;
    BinaryMask mask; ///< cropped to bbox

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Two-pass union-find labeling.
///
/// Pixels share an ID iff they are foreground and connected under `conn`.
/// IDs are compact (1..count) and assigned in raster-scan order of each
/// component's first pixel.
[[nodiscard]] InstanceMap label_components(const BinaryMask& mask, Connectivity conn);

/// Runs label_components on `label == c` for each requested class and returns
/// the components with area >= min_area, ordered by (class, component ID).
/// Throws RangeError if a requested class is outside [0, num_classes).
[[nodiscard]] std::vector<Instance> extract_instances(const LabelMap& label, std::span<const ClassIndex> classes,
                                                      Connectivity conn, std::size_t min_area);

} // namespace cp2m
