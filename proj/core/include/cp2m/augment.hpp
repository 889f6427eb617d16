#pragma once

#include "cp2m/ccl.hpp"
#include "cp2m/raster.hpp"
#include "cp2m/rng.hpp"

#include <array>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace cp2m {

struct AugmentConfig {
    double p_mosaic = 0.5;
    double p_cpm = 0.5;
    int out_width = 1000;
    int out_height = 1000;
    int k_max = 8;
    std::size_t min_area = 64;
    Connectivity connectivity = Connectivity::eight;
    /// Classes eligible as patch sources. Default: the five Potsdam classes other than clutter.
    std::vector<ClassIndex> cpm_classes{0, 1, 2, 3, 4};
    bool enable_flips = true;
    bool enable_quarter_rotations = true;

    /// Throws ValidationError if any field is out of range.
    void validate() const;

    /// Sets one field from its textual form, e.g. ("out_size", "512x512").
    void set(const std::string& key, const std::string& value);

    /// Parses `key = value` lines ('#' starts a comment). Unknown keys are an error.
    static AugmentConfig parse(std::istream& in, const std::string& source_name = "<stream>");
    static AugmentConfig load(const std::filesystem::path& path);

    /// Round-trips through parse().
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

struct Offset {
    int x = 0;
    int y = 0;

    friend constexpr bool operator==(const Offset&, const Offset&) = default;
};

/// Image and label pixels of one instance, cut from its source at the instance bbox.
struct Patch {
    Instance instance;
    ImagePlane pixels;
    ClassIndex class_index = 0;
};

[[nodiscard]] Patch make_patch(const SamplePair& source, const Instance& instance);

/// Anything that can hand out training samples. Implementations must be safe
/// to call concurrently from several workers.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    [[nodiscard]] virtual SamplePair draw(RngStream& rng) const = 0;
};

[[nodiscard]] SamplePair flip(const SamplePair& s, bool horizontal, bool vertical);

/// Rotates counter-clockwise by 90 degrees per turn. For one turn on a W x H
/// input the output is H x W and out(x, y) = in(W - 1 - y, x).
[[nodiscard]] SamplePair rotate_quarter(const SamplePair& s, int quarter_turns);

/// Uniformly placed window of exactly out_w x out_h. Throws SizeError if the source is smaller.
[[nodiscard]] SamplePair random_crop(const SamplePair& s, int out_w, int out_h, RngStream& rng);

/// Random flip, then quarter rotation, then crop to out_w x out_h.
///
/// Flip flags are two fair coin draws (when enabled). The rotation is drawn
/// uniformly among the turns after which the sample still covers the output
/// size, so non-square inputs only take odd turns when they fit.
[[nodiscard]] SamplePair random_geom(const SamplePair& s, int out_w, int out_h, const AugmentConfig& cfg,
                                     RngStream& rng);

/// Four samples placed as top-left, top-right, bottom-left, bottom-right, each
/// passed through random_geom at half the output size.
[[nodiscard]] SamplePair mosaic(const std::array<const SamplePair*, 4>& samples, const AugmentConfig& cfg,
                                RngStream& rng);

/// Composites `patch` onto `s` with the patch bbox's top-left at `offset`:
/// where the mask is set, image and label take the patch pixel and class;
/// elsewhere they are unchanged. Throws PlacementError if the patch would
/// leave the canvas.
[[nodiscard]] SamplePair paste_patch(const SamplePair& s, const Patch& patch, Offset offset);
void paste_patch_in_place(SamplePair& s, const Patch& patch, Offset offset);

/// Everything a clustered patch mix decided, for previews and tests.
struct CpmTrace {
    SamplePair source;               ///< patch source after random_geom
    std::vector<Instance> instances; ///< all qualifying instances in source
    std::vector<std::size_t> chosen; ///< indices into instances, in paste order
    std::vector<Offset> offsets;     ///< paste position per chosen instance
    SamplePair result;
};

[[nodiscard]] CpmTrace cpm_traced(const SamplePair& s, const SamplePair& source, const AugmentConfig& cfg,
                                  RngStream& rng);

/// Clustered patch mix: pastes k random instances from `source` onto `s`.
/// Returns `s` unchanged when no instance qualifies.
[[nodiscard]] SamplePair cpm(const SamplePair& s, const SamplePair& source, const AugmentConfig& cfg,
                             RngStream& rng);

struct Cp2mTrace {
    bool mosaic_applied = false;
    bool cpm_applied = false;
    SamplePair base; ///< mosaic or single geometric sample, before patch mixing
    std::optional<CpmTrace> cpm;
    SamplePair result;
};

/// Full pipeline: a Mosaic gate (p_mosaic) then an independent patch-mix gate (p_cpm).
[[nodiscard]] Cp2mTrace cp2m_traced(const SampleSource& sampler, const AugmentConfig& cfg, RngStream& rng);
[[nodiscard]] SamplePair cp2m(const SampleSource& sampler, const AugmentConfig& cfg, RngStream& rng);

} // namespace cp2m
