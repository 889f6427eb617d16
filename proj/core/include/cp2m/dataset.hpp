#pragma once

#include "cp2m/augment.hpp"
#include "cp2m/colormap.hpp"
#include "cp2m/raster.hpp"
#include "cp2m/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cp2m {

enum class Split { train, test };

[[nodiscard]] std::string_view to_string(Split s) noexcept;
[[nodiscard]] Split parse_split(std::string_view text);

struct ManifestEntry {
    Split split = Split::train;
    std::filesystem::path image; ///< as written, relative to the manifest directory
    std::filesystem::path label;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// A list of image/label pairs plus the colormap that decodes the labels.
///
/// File format, one record per line ('#' comments and blank lines ignored):
///
///     colormap <path>
///     <split> <image_path> <label_path>
///
/// Relative paths resolve against the manifest's own directory.
struct Manifest {
    std::filesystem::path base_dir;
    std::filesystem::path colormap;
    std::vector<ManifestEntry> entries;

    [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const;
    [[nodiscard]] std::vector<ManifestEntry> split(Split s) const;
    [[nodiscard]] ColorMap load_colormap() const;

    /// Checks duplicates and file existence; throws ValidationError listing every problem.
    void validate() const;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Parses and validates. `path`'s directory becomes base_dir.
[[nodiscard]] Manifest load_manifest(const std::filesystem::path& path);
/// Parses without touching the referenced files.
[[nodiscard]] Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                                      const std::string& source_name = "<manifest>");
/// Writes paths relative to `path`'s directory.
void save_manifest(const Manifest& m, const std::filesystem::path& path);

struct TileSpec {
    int window_w = 1000;
    int window_h = 1000;
    int stride_x = 1000;
    int stride_y = 1000;

    void validate() const;
};

/// Top-left corners of every window fully inside a W x H scene, row-major.
[[nodiscard]] std::vector<Offset> tile_offsets(int width, int height, const TileSpec& spec);
/// (floor((W - w) / sx) + 1) * (floor((H - h) / sy) + 1), or 0 when the window does not fit.
[[nodiscard]] std::size_t tile_count(int width, int height, const TileSpec& spec);

/// Cuts a scene into windows. Throws SizeError if the scene is smaller than the window.
[[nodiscard]] std::vector<SamplePair> tile(const SamplePair& scene, const TileSpec& spec);

/// Reads one entry's PNG pair and decodes the label through `cmap`.
[[nodiscard]] SamplePair load_sample(const Manifest& m, const ManifestEntry& e, const ColorMap& cmap);

/// Index of a uniform draw over a split of `split_size` tiles.
[[nodiscard]] std::size_t sample_index(std::size_t split_size, RngStream& rng);

/// Uniform draw over a split; throws EmptySplitError when the split is empty.
[[nodiscard]] SamplePair sample(const Manifest& m, Split split, std::uint64_t index, std::uint64_t seed);

/// Serves uniformly drawn samples of one manifest split, decoding PNGs on demand.
class ManifestSource final : public SampleSource {
public:
    ManifestSource(Manifest manifest, Split split);

    [[nodiscard]] SamplePair draw(RngStream& rng) const override;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const ColorMap& colormap() const noexcept { return cmap_; }

private:
    Manifest manifest_;
    ColorMap cmap_;
    std::vector<ManifestEntry> entries_;
};

/// Serves uniformly drawn samples from memory.
class InMemorySource final : public SampleSource {
public:
    explicit InMemorySource(std::vector<SamplePair> samples);

    [[nodiscard]] SamplePair draw(RngStream& rng) const override;
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

private:
    std::vector<SamplePair> samples_;
};

} // namespace cp2m
