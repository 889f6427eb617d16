#include "commands.hpp"

#include <cp2m/error.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace cp2m;

// Flags shared by augment and preview; set values override the config file.
struct AugmentFlags {
    std::string config_path;
    std::optional<double> p_mosaic;
    std::optional<double> p_cpm;
    std::optional<int> k_max;
    std::optional<std::size_t> min_area;
    std::optional<std::string> connectivity;
    std::optional<std::string> out_size;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--config", config_path, "augmentation config file (key = value lines)")
            ->check(CLI::ExistingFile);
        cmd.add_option("--p-mosaic", p_mosaic, "probability of the Mosaic phase")->check(CLI::Range(0.0, 1.0));
        cmd.add_option("--p-cpm", p_cpm, "probability of the clustered patch mix phase")
            ->check(CLI::Range(0.0, 1.0));
        cmd.add_option("--k-max", k_max, "maximum patches pasted per sample")->check(CLI::PositiveNumber);
        cmd.add_option("--min-area", min_area, "smallest instance area eligible as a patch");
        cmd.add_option("--connectivity", connectivity, "pixel adjacency for labeling")
            ->check(CLI::IsMember({"4", "8"}));
        cmd.add_option("--out-size", out_size, "output size WIDTHxHEIGHT");
    }

    [[nodiscard]] AugmentConfig resolve() const
    {
        auto cfg = config_path.empty() ? AugmentConfig{} : AugmentConfig::load(config_path);
        if (p_mosaic) {
            cfg.p_mosaic = *p_mosaic;
        }
        if (p_cpm) {
            cfg.p_cpm = *p_cpm;
        }
        if (k_max) {
            cfg.k_max = *k_max;
        }
        if (min_area) {
            cfg.min_area = *min_area;
        }
        if (connectivity) {
            cfg.connectivity = parse_connectivity(*connectivity);
        }
        if (out_size) {
            cfg.set("out_size", *out_size);
        }
        cfg.validate();
        return cfg;
    }
};

void print(const cli::RunReport& report, bool key_values)
{
    std::cout << (key_values ? report.to_key_values() : report.to_text());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cp2m: Mosaic and clustered patch mix augmentation for paired image/label rasters"};
    app.require_subcommand(1);
    app.fallthrough();
    bool key_values = false;
    app.add_flag("--kv", key_values, "print the run report as key=value lines");

    int workers = cli::default_workers();
    std::string manifest;
    std::string out;
    std::uint64_t seed = 0;

    auto* tile = app.add_subcommand("tile", "cut scenes into fixed windows");
    int window = 1000;
    std::optional<int> stride;
    tile->add_option("--manifest", manifest, "scene manifest")->required()->check(CLI::ExistingFile);
    tile->add_option("--out", out, "output directory")->required();
    tile->add_option("--window", window, "square window size in pixels")->check(CLI::PositiveNumber);
    tile->add_option("--stride", stride, "window step in pixels (default: window)")->check(CLI::PositiveNumber);
    tile->add_option("--workers", workers, "parallel workers (env CP2M_WORKERS)")->check(CLI::PositiveNumber);

    auto* augment = app.add_subcommand("augment", "generate augmented samples from the train split");
    AugmentFlags augment_flags;
    std::size_t n_samples = 0;
    augment->add_option("--manifest", manifest, "tile manifest")->required()->check(CLI::ExistingFile);
    augment->add_option("--out", out, "output directory")->required();
    augment->add_option("--seed", seed, "random seed");
    augment->add_option("--n-samples", n_samples, "number of samples to generate")->required();
    augment->add_option("--workers", workers, "parallel workers (env CP2M_WORKERS)")->check(CLI::PositiveNumber);
    augment_flags.attach(*augment);

    auto* preview = app.add_subcommand("preview", "render the A-H pipeline panel");
    AugmentFlags preview_flags;
    std::size_t columns = 5;
    preview->add_option("--manifest", manifest, "tile manifest")->required()->check(CLI::ExistingFile);
    preview->add_option("--out", out, "output PNG path")->required();
    preview->add_option("--seed", seed, "random seed");
    preview->add_option("--n-samples", columns, "number of panel columns")->check(CLI::PositiveNumber);
    preview_flags.attach(*preview);

    auto* eval = app.add_subcommand("eval", "score color-coded predictions against ground truth");
    std::string pred_dir;
    std::string colormap;
    std::string split = "test";
    std::optional<int> ignore_index;
    eval->add_option("--pred", pred_dir, "directory of prediction PNGs named like the GT labels")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--manifest", manifest, "ground-truth manifest")->required()->check(CLI::ExistingFile);
    eval->add_option("--colormap", colormap, "colormap override")->check(CLI::ExistingFile);
    eval->add_option("--split", split, "split to evaluate")->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--ignore-index", ignore_index, "ground-truth class excluded from scoring")
        ->check(CLI::Range(0, 255));
    eval->add_option("--workers", workers, "parallel workers (env CP2M_WORKERS)")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (tile->parsed()) {
            cli::TileOptions opt;
            opt.manifest = manifest;
            opt.out_dir = out;
            opt.spec = {window, window, stride.value_or(window), stride.value_or(window)};
            opt.workers = workers;
            const auto report = cli::cmd_tile(opt);
            print(report, key_values);
            return report.ok() ? 0 : 1;
        }
        if (augment->parsed()) {
            cli::AugmentOptions opt;
            opt.manifest = manifest;
            opt.out_dir = out;
            opt.seed = seed;
            opt.n_samples = n_samples;
            opt.workers = workers;
            opt.config = augment_flags.resolve();
            const auto report = cli::cmd_augment(opt);
            print(report, key_values);
            return report.ok() ? 0 : 1;
        }
        if (preview->parsed()) {
            cli::PreviewOptions opt;
            opt.manifest = manifest;
            opt.out_path = out;
            opt.seed = seed;
            opt.columns = columns;
            opt.config = preview_flags.resolve();
            const auto report = cli::cmd_preview(opt);
            print(report, key_values);
            return report.ok() ? 0 : 1;
        }
        if (eval->parsed()) {
            cli::EvalOptions opt;
            opt.pred_dir = pred_dir;
            opt.gt_manifest = manifest;
            if (!colormap.empty()) {
                opt.colormap = colormap;
            }
            opt.split = parse_split(split);
            if (ignore_index) {
                opt.ignore_index = static_cast<ClassIndex>(*ignore_index);
            }
            opt.workers = workers;
            const auto result = cli::cmd_eval(opt);
            std::cout << result.table;
            print(result.report, key_values);
            return result.report.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
