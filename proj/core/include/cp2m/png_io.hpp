#pragma once

#include "cp2m/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cp2m {

/// Decodes an 8-bit RGB or RGBA PNG. Alpha is discarded.
///
/// Throws DecodeError for malformed streams and UnsupportedFormatError for
/// palette, grayscale, or 16-bit images.
[[nodiscard]] ImagePlane decode_image(std::span<const std::uint8_t> bytes);

/// Encodes as a lossless 8-bit RGB PNG. Output bytes depend only on the pixels.
[[nodiscard]] std::vector<std::uint8_t> encode_image(const ImagePlane& img);

[[nodiscard]] std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

[[nodiscard]] ImagePlane read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImagePlane& img);

} // namespace cp2m
