#pragma once

#include <cp2m/augment.hpp>
#include <cp2m/colormap.hpp>
#include <cp2m/dataset.hpp>
#include <cp2m/metrics.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cp2m::cli {

/// Summary of one command run, printable as text or as key=value lines.
///
/// Everything except the timing fields is a pure function of the inputs, the
/// flags and the seed.
struct RunReport {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_snapshot;
    std::size_t scheduled = 0;
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::size_t skipped = 0;
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<std::string> errors;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, double>> stage_seconds;

    void set(const std::string& key, const std::string& value);
    [[nodiscard]] std::string get(const std::string& key) const;
    void add_stage(const std::string& name, double seconds);

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_key_values() const;
};

/// Worker count from CP2M_WORKERS, else the hardware concurrency (at least 1).
[[nodiscard]] int default_workers();

struct TileOptions {
    std::filesystem::path manifest;
    TileSpec spec;
    std::filesystem::path out_dir;
    int workers = 1;
};

/// Cuts every scene of the manifest into windows and writes
///
///     <out>/images/<scene>_r<row>_c<col>.png
///     <out>/labels/<scene>_r<row>_c<col>.png
///     <out>/colormap.txt
///     <out>/manifest.txt      (one entry per tile, scene split preserved)
///     <out>/report.txt
///
/// where <scene> is the stem of the scene's image file.
RunReport cmd_tile(const TileOptions& opt);

struct AugmentOptions {
    std::filesystem::path manifest;
    AugmentConfig config;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::filesystem::path out_dir;
    int workers = 1;
};

/// Writes n augmented pairs as <out>/images/aug_NNNNNN.png and
/// <out>/labels/aug_NNNNNN.png, plus manifest.txt, colormap.txt and report.txt.
/// Sample i depends only on (seed, i).
RunReport cmd_augment(const AugmentOptions& opt);

struct PreviewOptions {
    std::filesystem::path manifest;
    AugmentConfig config;
    std::uint64_t seed = 0;
    std::size_t columns = 5;
    std::filesystem::path out_path;
};

inline constexpr int kPreviewRows = 8;

/// Eight stacked rows per column, each out_width x out_height:
/// A mosaic image, B mosaic label, C patch source image, D patch source label,
/// E instance coloring of the source, F selected masks at their paste
/// positions, G output image, H output label. Both phases are forced on.
[[nodiscard]] ImagePlane render_preview(const SampleSource& source, const ColorMap& cmap, const AugmentConfig& config,
                                        std::uint64_t seed, std::size_t columns);

/// Distinct colors for instance IDs 1, 2, ...; ID 0 is black.
[[nodiscard]] Rgb instance_color(std::uint32_t id) noexcept;

RunReport cmd_preview(const PreviewOptions& opt);

struct EvalOptions {
    std::filesystem::path pred_dir;
    std::filesystem::path gt_manifest;
    std::optional<std::filesystem::path> colormap;
    Split split = Split::test;
    std::optional<ClassIndex> ignore_index;
    int workers = 1;
};

struct EvalResult {
    RunReport report;
    ConfusionMatrix matrix;
    std::string table;
};

/// Compares <pred_dir>/<label file name> with each ground-truth label of the split.
EvalResult cmd_eval(const EvalOptions& opt);

/// Aligned table (Accuracy, mIoU, C1..Cn in percent) followed by key=value lines.
[[nodiscard]] std::string format_metrics(const ConfusionMatrix& cm);

} // namespace cp2m::cli
