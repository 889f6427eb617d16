#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cp2m {

using ClassIndex = std::uint8_t;

/// Maximum number of classes a LabelMap can carry (indices are 8-bit).
inline constexpr int kMaxClasses = 256;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr auto operator<=>(const Rgb&, const Rgb&) = default;
};

/// Axis-aligned rectangle in pixel coordinates, x0/y0 inclusive, width/height exclusive extent.
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

/// H x W x 3 raster of 8-bit RGB samples, row-major, channel-interleaved.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int width, int height, Rgb fill = {});
    ImagePlane(int width, int height, std::vector<std::uint8_t> data);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] Rgb at(int x, int y) const noexcept
    {
        const auto i = offset(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) noexcept
    {
        const auto i = offset(x, y);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    [[nodiscard]] std::span<const std::uint8_t> data() const noexcept { return data_; }
    [[nodiscard]] std::span<std::uint8_t> data() noexcept { return data_; }
    [[nodiscard]] std::span<const std::uint8_t> row(int y) const noexcept
    {
        return std::span(data_).subspan(offset(0, y), static_cast<std::size_t>(width_) * 3);
    }
    [[nodiscard]] std::span<std::uint8_t> row(int y) noexcept
    {
        return std::span(data_).subspan(offset(0, y), static_cast<std::size_t>(width_) * 3);
    }

    /// Copies the sub-raster `r`, which must lie inside the image.
    [[nodiscard]] ImagePlane crop(const Rect& r) const;

    friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

private:
    [[nodiscard]] std::size_t offset(int x, int y) const noexcept
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// H x W raster of class indices in [0, num_classes).
class LabelMap {
public:
    LabelMap() = default;
    LabelMap(int width, int height, int num_classes, ClassIndex fill = 0);
    LabelMap(int width, int height, int num_classes, std::vector<ClassIndex> data);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] ClassIndex at(int x, int y) const noexcept { return data_[index(x, y)]; }
    /// Caller guarantees `c < num_classes()`.
    void set(int x, int y, ClassIndex c) noexcept { data_[index(x, y)] = c; }

    [[nodiscard]] std::span<const ClassIndex> data() const noexcept { return data_; }
    /// Writable view; values written must stay below num_classes().
    [[nodiscard]] std::span<ClassIndex> data() noexcept { return data_; }

    [[nodiscard]] LabelMap crop(const Rect& r) const;

    friend bool operator==(const LabelMap&, const LabelMap&) = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    int num_classes_ = 0;
    std::vector<ClassIndex> data_;
};

/// An image and its label map; the unit flowing through augmentation.
struct SamplePair {
    ImagePlane image;
    LabelMap label;

    SamplePair() = default;
    /// Throws SizeError when the two planes disagree on dimensions.
    SamplePair(ImagePlane img, LabelMap lbl);

    [[nodiscard]] int width() const noexcept { return image.width(); }
    [[nodiscard]] int height() const noexcept { return image.height(); }
    [[nodiscard]] SamplePair crop(const Rect& r) const;

    friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

} // namespace cp2m
