#pragma once

#include <cp2m/colormap.hpp>
#include <cp2m/dataset.hpp>
#include <cp2m/png_io.hpp>

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace cp2m::testing {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cp2m_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Writes scenes as PNG pairs plus a colormap and manifest in `dir`; returns the manifest path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, const ColorMap& cmap,
                                           const std::vector<std::pair<Split, SamplePair>>& scenes)
{
    std::filesystem::create_directories(dir / "img");
    std::filesystem::create_directories(dir / "lbl");
    cmap.save(dir / "colors.txt");
    Manifest m;
    m.base_dir = dir;
    m.colormap = "colors.txt";
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto name = "scene" + std::to_string(i) + ".png";
        write_image(dir / "img" / name, scenes[i].second.image);
        write_image(dir / "lbl" / name, color_from_label(scenes[i].second.label, cmap));
        m.entries.push_back({scenes[i].first, std::filesystem::path("img") / name, std::filesystem::path("lbl") / name});
    }
    save_manifest(m, dir / "manifest.txt");
    return dir / "manifest.txt";
}

} // namespace cp2m::testing
