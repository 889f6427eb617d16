#pragma once

// Independent reference implementations used only by tests. None of these
// call into the code paths they check.

#include <cp2m/ccl.hpp>
#include <cp2m/raster.hpp>
#include <cp2m/rng.hpp>

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace cp2m::oracle {

/// BFS flood fill. Returns per-pixel component number (0 = background, then
/// 1.. in raster order of each component's first pixel) and the count.
inline std::pair<std::vector<std::uint32_t>, std::uint32_t> flood_fill(int width, int height,
                                                                        const std::vector<std::uint8_t>& bits,
                                                                        bool eight)
{
    std::vector<std::uint32_t> ids(bits.size(), 0);
    std::uint32_t count = 0;
    for (int sy = 0; sy < height; ++sy) {
        for (int sx = 0; sx < width; ++sx) {
            const auto s = static_cast<std::size_t>(sy * width + sx);
            if (bits[s] == 0 || ids[s] != 0) {
                continue;
            }
            ++count;
            std::deque<std::pair<int, int>> queue{{sx, sy}};
            ids[s] = count;
            while (!queue.empty()) {
                const auto [x, y] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) {
                            continue;
                        }
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= width || ny >= height) {
                            continue;
                        }
                        const auto n = static_cast<std::size_t>(ny * width + nx);
                        if (bits[n] != 0 && ids[n] == 0) {
                            ids[n] = count;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
        }
    }
    return {ids, count};
}

/// True when two labelings induce the same partition of the pixels (IDs may differ).
inline bool same_partition(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    std::map<std::uint32_t, std::uint32_t> ab;
    std::map<std::uint32_t, std::uint32_t> ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == 0) != (b[i] == 0)) {
            return false;
        }
        if (a[i] == 0) {
            continue;
        }
        const auto [it1, new1] = ab.emplace(a[i], b[i]);
        const auto [it2, new2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i]) {
            return false;
        }
    }
    return true;
}

/// Per-pixel evaluation of out = base * (1 - mask) + source * mask over the
/// whole canvas, with the patch mask and pixels embedded at `offset`.
inline SamplePair composite(const SamplePair& base, const BinaryMask& mask, const ImagePlane& patch_pixels,
                            ClassIndex patch_class, int ox, int oy)
{
    SamplePair out = base;
    for (int y = 0; y < base.height(); ++y) {
        for (int x = 0; x < base.width(); ++x) {
            const int px = x - ox;
            const int py = y - oy;
            const bool inside = px >= 0 && py >= 0 && px < mask.width() && py < mask.height();
            const int m = inside && mask.at(px, py) ? 1 : 0;
            const Rgb src = inside ? patch_pixels.at(px, py) : Rgb{};
            const Rgb dst = base.image.at(x, y);
            out.image.set(x, y,
                          {static_cast<std::uint8_t>(dst.r * (1 - m) + src.r * m),
                           static_cast<std::uint8_t>(dst.g * (1 - m) + src.g * m),
                           static_cast<std::uint8_t>(dst.b * (1 - m) + src.b * m)});
            out.label.set(x, y, static_cast<ClassIndex>(base.label.at(x, y) * (1 - m) + patch_class * m));
        }
    }
    return out;
}

/// IoU per class from pixel index sets, and the mean over classes with a
/// non-empty union. Returns {per-class IoU (NaN if absent), mIoU, accuracy}.
struct SetMetrics {
    std::vector<double> iou;
    double miou = 0.0;
    double accuracy = 0.0;
};

inline SetMetrics set_metrics(const std::vector<ClassIndex>& pred, const std::vector<ClassIndex>& gt,
                              int num_classes)
{
    SetMetrics m;
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::set<std::size_t> p;
        std::set<std::size_t> g;
        for (std::size_t i = 0; i < gt.size(); ++i) {
            if (pred[i] == c) {
                p.insert(i);
            }
            if (gt[i] == c) {
                g.insert(i);
            }
        }
        std::size_t inter = 0;
        for (auto i : p) {
            inter += g.count(i);
        }
        const auto uni = p.size() + g.size() - inter;
        if (uni == 0) {
            m.iou.push_back(std::nan(""));
            continue;
        }
        const double v = static_cast<double>(inter) / static_cast<double>(uni);
        m.iou.push_back(v);
        sum += v;
        ++present;
    }
    m.miou = present > 0 ? sum / present : std::nan("");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        correct += pred[i] == gt[i] ? 1 : 0;
    }
    m.accuracy = gt.empty() ? std::nan("") : static_cast<double>(correct) / static_cast<double>(gt.size());
    return m;
}

// ---- fixture generators -------------------------------------------------

inline ImagePlane random_image(int w, int h, RngStream& rng)
{
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (auto& v : px) {
        v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    }
    return ImagePlane(w, h, std::move(px));
}

inline LabelMap random_labels(int w, int h, int num_classes, RngStream& rng)
{
    std::vector<ClassIndex> v(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (auto& c : v) {
        c = static_cast<ClassIndex>(rng.uniform_int(0, num_classes - 1));
    }
    return LabelMap(w, h, num_classes, std::move(v));
}

/// Labels made of random axis-aligned blobs, so components are sizeable.
inline LabelMap blobby_labels(int w, int h, int num_classes, int blobs, RngStream& rng)
{
    LabelMap m(w, h, num_classes, 0);
    for (int b = 0; b < blobs; ++b) {
        const auto c = static_cast<ClassIndex>(rng.uniform_int(0, num_classes - 1));
        const int bw = static_cast<int>(rng.uniform_int(1, std::max(1, w / 3)));
        const int bh = static_cast<int>(rng.uniform_int(1, std::max(1, h / 3)));
        const int x0 = static_cast<int>(rng.uniform_int(0, w - bw));
        const int y0 = static_cast<int>(rng.uniform_int(0, h - bh));
        for (int y = y0; y < y0 + bh; ++y) {
            for (int x = x0; x < x0 + bw; ++x) {
                m.set(x, y, c);
            }
        }
    }
    return m;
}

inline SamplePair random_sample(int w, int h, int num_classes, RngStream& rng)
{
    auto img = random_image(w, h, rng);
    return SamplePair(std::move(img), blobby_labels(w, h, num_classes, 6, rng));
}

inline SamplePair uniform_sample(int w, int h, Rgb color, ClassIndex cls, int num_classes)
{
    return SamplePair(ImagePlane(w, h, color), LabelMap(w, h, num_classes, cls));
}

inline std::vector<std::uint8_t> random_bits(int w, int h, double density, RngStream& rng)
{
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (auto& b : bits) {
        b = rng.uniform01() < density ? 1 : 0;
    }
    return bits;
}

} // namespace cp2m::oracle
