#include "commands.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

#include <cp2m/error.hpp>
#include <cp2m/png_io.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace cp2m;
using cp2m::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::vector<std::pair<Split, SamplePair>> scenes(int n_train, int n_test, int size, std::uint64_t seed)
{
    RngStream rng(seed);
    std::vector<std::pair<Split, SamplePair>> out;
    for (int i = 0; i < n_train + n_test; ++i) {
        auto s = oracle::random_sample(size, size, 6, rng);
        out.emplace_back(i < n_train ? Split::train : Split::test, std::move(s));
    }
    return out;
}

AugmentConfig small_config(int size)
{
    AugmentConfig cfg;
    cfg.out_width = size;
    cfg.out_height = size;
    cfg.min_area = 4;
    return cfg;
}

std::vector<fs::path> sorted_files(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out.push_back(fs::relative(e.path(), dir));
        }
    }
    std::ranges::sort(out);
    return out;
}

} // namespace

TEST(CmdTile, WritesEveryWindowAndKeepsSplits)
{
    TempDir dir("tile");
    const auto data = scenes(2, 1, 20, 1);
    const auto manifest = cp2m::testing::write_dataset(dir / "src", ColorMap::potsdam(), data);
    cli::TileOptions opt;
    opt.manifest = manifest;
    opt.out_dir = dir / "tiles";
    opt.spec = {8, 8, 6, 6};
    opt.workers = 2;
    const auto report = cli::cmd_tile(opt);
    EXPECT_TRUE(report.ok());
    // floor((20 - 8) / 6) + 1 = 3 per axis.
    EXPECT_EQ(report.get("train_tiles"), "18");
    EXPECT_EQ(report.get("test_tiles"), "9");

    const auto tiles = load_manifest(opt.out_dir / "manifest.txt");
    ASSERT_EQ(tiles.entries.size(), 27u);
    const auto cmap = tiles.load_colormap();
    EXPECT_EQ(cmap, ColorMap::potsdam());
    // The tile at row 1, col 2 of scene 0 is the window at (12, 6).
    const auto& e = tiles.entries[5];
    EXPECT_EQ(e.image.filename(), "scene0_r1_c2.png");
    EXPECT_EQ(load_sample(tiles, e, cmap), data[0].second.crop({12, 6, 8, 8}));
}

TEST(CmdTile, RejectsSceneSmallerThanWindow)
{
    TempDir dir("tile_small");
    const auto manifest = cp2m::testing::write_dataset(dir / "src", ColorMap::potsdam(), scenes(1, 0, 5, 2));
    cli::TileOptions opt;
    opt.manifest = manifest;
    opt.out_dir = dir / "tiles";
    opt.spec = {8, 8, 8, 8};
    EXPECT_THROW((void)cli::cmd_tile(opt), SizeError);
}

TEST(CmdAugment, ByteIdenticalAcrossRunsAndWorkerCounts)
{
    TempDir dir("augment");
    const auto manifest = cp2m::testing::write_dataset(dir / "src", ColorMap::potsdam(), scenes(4, 0, 24, 3));
    cli::AugmentOptions opt;
    opt.manifest = manifest;
    opt.config = small_config(16);
    opt.seed = 42;
    opt.n_samples = 12;

    std::vector<fs::path> outs;
    for (int workers : {1, 1, 4}) {
        opt.workers = workers;
        opt.out_dir = dir / ("out" + std::to_string(outs.size()));
        const auto report = cli::cmd_augment(opt);
        EXPECT_TRUE(report.ok());
        EXPECT_EQ(report.scheduled, 12u);
        outs.push_back(opt.out_dir);
    }
    const auto files = sorted_files(outs[0]);
    EXPECT_EQ(files, sorted_files(outs[1]));
    EXPECT_EQ(files, sorted_files(outs[2]));
    for (const auto& f : files) {
        if (f == "report.txt") {
            continue; // timing fields
        }
        const auto a = read_file(outs[0] / f);
        EXPECT_EQ(a, read_file(outs[1] / f)) << f;
        EXPECT_EQ(a, read_file(outs[2] / f)) << f;
    }
    // The generated set is itself a valid manifest of 16x16 samples.
    const auto generated = load_manifest(outs[0] / "manifest.txt");
    ASSERT_EQ(generated.entries.size(), 12u);
    EXPECT_EQ(load_sample(generated, generated.entries[3], generated.load_colormap()).width(), 16);
}

TEST(CmdAugment, SampleDependsOnlyOnSeedAndIndex)
{
    TempDir dir("augment_prefix");
    const auto manifest = cp2m::testing::write_dataset(dir / "src", ColorMap::potsdam(), scenes(3, 0, 20, 4));
    cli::AugmentOptions opt;
    opt.manifest = manifest;
    opt.config = small_config(12);
    opt.seed = 7;
    opt.n_samples = 3;
    opt.out_dir = dir / "short";
    (void)cli::cmd_augment(opt);
    opt.n_samples = 8;
    opt.out_dir = dir / "long";
    (void)cli::cmd_augment(opt);
    for (const char* name : {"aug_000000.png", "aug_000001.png", "aug_000002.png"}) {
        EXPECT_EQ(read_file(dir / "short" / "images" / name), read_file(dir / "long" / "images" / name));
    }
}

TEST(CmdAugment, EmptyTrainSplitIsError)
{
    TempDir dir("augment_empty");
    const auto manifest = cp2m::testing::write_dataset(dir / "src", ColorMap::potsdam(), scenes(0, 2, 10, 5));
    cli::AugmentOptions opt;
    opt.manifest = manifest;
    opt.config = small_config(8);
    opt.n_samples = 1;
    opt.out_dir = dir / "out";
    EXPECT_THROW((void)cli::cmd_augment(opt), EmptySplitError);
}

TEST(Preview, PanelLayoutAndUntouchedPixels)
{
    RngStream fix(6);
    std::vector<SamplePair> pool;
    for (int i = 0; i < 4; ++i) {
        pool.push_back(oracle::random_sample(24, 24, 6, fix));
    }
    const InMemorySource source(pool);
    const auto cfg = small_config(16);
    const auto panel = cli::render_preview(source, ColorMap::potsdam(), cfg, 11, 3);
    ASSERT_EQ(panel.width(), 48);
    ASSERT_EQ(panel.height(), 16 * cli::kPreviewRows);
    const Rgb white{255, 255, 255};
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                const int px = c * 16 + x;
                if (panel.at(px, 5 * 16 + y) != white) {
                    ASSERT_EQ(panel.at(px, 6 * 16 + y), panel.at(px, y)) << c << ":" << x << "," << y;
                }
            }
        }
    }
    EXPECT_EQ(panel, cli::render_preview(source, ColorMap::potsdam(), cfg, 11, 3));
}

TEST(Preview, InstanceColorsAreDistinct)
{
    EXPECT_EQ(cli::instance_color(0), (Rgb{0, 0, 0}));
    std::set<Rgb> seen;
    for (std::uint32_t id = 1; id <= 32; ++id) {
        seen.insert(cli::instance_color(id));
    }
    EXPECT_EQ(seen.size(), 32u);
}

class CmdEval : public ::testing::Test {
protected:
    void SetUp() override
    {
        data_ = scenes(0, 3, 10, 8);
        manifest_ = cp2m::testing::write_dataset(dir_ / "gt", ColorMap::potsdam(), data_);
        fs::create_directories(dir_ / "pred");
    }

    void write_pred(std::size_t i, const LabelMap& lbl)
    {
        write_image(dir_ / "pred" / ("scene" + std::to_string(i) + ".png"), color_from_label(lbl, ColorMap::potsdam()));
    }

    cli::EvalOptions options() const
    {
        cli::EvalOptions opt;
        opt.pred_dir = dir_ / "pred";
        opt.gt_manifest = manifest_;
        opt.workers = 2;
        return opt;
    }

    TempDir dir_{"eval"};
    std::vector<std::pair<Split, SamplePair>> data_;
    fs::path manifest_;
};

TEST_F(CmdEval, PerfectPredictionsScoreOne)
{
    for (std::size_t i = 0; i < data_.size(); ++i) {
        write_pred(i, data_[i].second.label);
    }
    const auto result = cli::cmd_eval(options());
    EXPECT_TRUE(result.report.ok());
    EXPECT_EQ(result.matrix.total(), 300u);
    EXPECT_DOUBLE_EQ(miou(result.matrix), 1.0);
    EXPECT_DOUBLE_EQ(pixel_accuracy(result.matrix), 1.0);
    EXPECT_NE(result.table.find("100.00"), std::string::npos) << result.table;
}

TEST_F(CmdEval, MergedScoresMatchConcatenatedOracle)
{
    std::vector<ClassIndex> all_pred;
    std::vector<ClassIndex> all_gt;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        // Constant predictions of class i.
        const LabelMap pred(10, 10, 6, static_cast<ClassIndex>(i));
        write_pred(i, pred);
        all_pred.insert(all_pred.end(), pred.data().begin(), pred.data().end());
        const auto& gt = data_[i].second.label;
        all_gt.insert(all_gt.end(), gt.data().begin(), gt.data().end());
    }
    const auto result = cli::cmd_eval(options());
    const auto ref = oracle::set_metrics(all_pred, all_gt, 6);
    EXPECT_NEAR(miou(result.matrix), ref.miou, 1e-12);
    EXPECT_NEAR(pixel_accuracy(result.matrix), ref.accuracy, 1e-12);
}

TEST_F(CmdEval, MissingPredictionsAreListed)
{
    write_pred(0, data_[0].second.label);
    try {
        (void)cli::cmd_eval(options());
        FAIL();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("scene1.png"), std::string::npos) << msg;
        EXPECT_NE(msg.find("scene2.png"), std::string::npos) << msg;
    }
}

TEST_F(CmdEval, BadFilesAreSkippedAndReported)
{
    write_pred(0, data_[0].second.label);
    write_pred(1, data_[1].second.label);
    write_image(dir_ / "pred" / "scene2.png", ImagePlane(10, 10, Rgb{1, 2, 3}));
    const auto result = cli::cmd_eval(options());
    EXPECT_FALSE(result.report.ok());
    EXPECT_EQ(result.report.skipped, 1u);
    EXPECT_EQ(result.report.outputs, 2u);
    EXPECT_EQ(result.matrix.total(), 200u);
}

TEST(FormatMetrics, TableAndKeyValues)
{
    ConfusionMatrix cm(3);
    cm.add(0, 0, 1);
    cm.add(1, 0, 1);
    cm.add(1, 1, 2);
    const auto text = cli::format_metrics(cm);
    EXPECT_NE(text.find("Accuracy"), std::string::npos);
    EXPECT_NE(text.find("mIoU"), std::string::npos);
    EXPECT_NE(text.find("75.00"), std::string::npos) << text;
    EXPECT_NE(text.find("58.33"), std::string::npos) << text;
    EXPECT_NE(text.find("-"), std::string::npos) << text; // class 2 absent
}
