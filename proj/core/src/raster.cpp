#include "cp2m/raster.hpp"

#include "cp2m/error.hpp"

#include <algorithm>
#include <string>

namespace cp2m {

namespace {

void check_dims(int width, int height)
{
    if (width < 1 || height < 1) {
        throw SizeError("raster dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
}

void check_rect(const Rect& r, int width, int height)
{
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > width || r.y + r.height > height) {
        throw SizeError("crop window " + std::to_string(r.width) + "x" + std::to_string(r.height) + "+" +
                        std::to_string(r.x) + "+" + std::to_string(r.y) + " exceeds " + std::to_string(width) +
                        "x" + std::to_string(height) + " raster");
    }
}

} // namespace

ImagePlane::ImagePlane(int width, int height, Rgb fill) : width_(width), height_(height)
{
    check_dims(width, height);
    data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

ImagePlane::ImagePlane(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data))
{
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw SizeError("image buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                        std::to_string(static_cast<std::size_t>(width) * height * 3));
    }
}

ImagePlane ImagePlane::crop(const Rect& r) const
{
    check_rect(r, width_, height_);
    ImagePlane out(r.width, r.height);
    for (int y = 0; y < r.height; ++y) {
        const auto src = row(r.y + y).subspan(static_cast<std::size_t>(r.x) * 3, static_cast<std::size_t>(r.width) * 3);
        std::ranges::copy(src, out.row(y).begin());
    }
    return out;
}

LabelMap::LabelMap(int width, int height, int num_classes, ClassIndex fill)
    : width_(width), height_(height), num_classes_(num_classes)
{
    check_dims(width, height);
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw RangeError("num_classes must be in [1, 256], got " + std::to_string(num_classes));
    }
    if (fill >= num_classes) {
        throw RangeError("fill class " + std::to_string(fill) + " out of range for " + std::to_string(num_classes) +
                         " classes");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

LabelMap::LabelMap(int width, int height, int num_classes, std::vector<ClassIndex> data)
    : width_(width), height_(height), num_classes_(num_classes), data_(std::move(data))
{
    check_dims(width, height);
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw RangeError("num_classes must be in [1, 256], got " + std::to_string(num_classes));
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw SizeError("label buffer holds " + std::to_string(data_.size()) + " values, expected " +
                        std::to_string(static_cast<std::size_t>(width) * height));
    }
    const auto bad = std::ranges::find_if(data_, [&](ClassIndex c) { return c >= num_classes; });
    if (bad != data_.end()) {
        const auto i = static_cast<std::size_t>(bad - data_.begin());
        throw RangeError("class " + std::to_string(*bad) + " at pixel (" + std::to_string(i % width) + "," +
                         std::to_string(i / width) + ") out of range for " + std::to_string(num_classes) +
                         " classes");
    }
}

LabelMap LabelMap::crop(const Rect& r) const
{
    check_rect(r, width_, height_);
    std::vector<ClassIndex> out(static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height));
    auto dst = out.begin();
    for (int y = 0; y < r.height; ++y) {
        const auto src = data_.begin() + static_cast<std::ptrdiff_t>(index(r.x, r.y + y));
        dst = std::copy(src, src + r.width, dst);
    }
    LabelMap m;
    m.width_ = r.width;
    m.height_ = r.height;
    m.num_classes_ = num_classes_;
    m.data_ = std::move(out);
    return m;
}

SamplePair::SamplePair(ImagePlane img, LabelMap lbl) : image(std::move(img)), label(std::move(lbl))
{
    if (image.width() != label.width() || image.height() != label.height()) {
        throw SizeError("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                        " but label is " + std::to_string(label.width()) + "x" + std::to_string(label.height()));
    }
}

SamplePair SamplePair::crop(const Rect& r) const
{
    SamplePair out;
    out.image = image.crop(r);
    out.label = label.crop(r);
    return out;
}

} // namespace cp2m
