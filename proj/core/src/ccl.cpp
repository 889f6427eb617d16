#include "cp2m/ccl.hpp"

#include "cp2m/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace cp2m {

std::string_view to_string(Connectivity c) noexcept
{
    return c == Connectivity::four ? "4" : "8";
}

Connectivity parse_connectivity(std::string_view text)
{
    if (text == "4") {
        return Connectivity::four;
    }
    if (text == "8") {
        return Connectivity::eight;
    }
    throw ValidationError("connectivity must be 4 or 8, got '" + std::string(text) + "'");
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height)
{
    if (width < 1 || height < 1) {
        throw SizeError("mask dimensions must be at least 1x1");
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits))
{
    if (width < 1 || height < 1) {
        throw SizeError("mask dimensions must be at least 1x1");
    }
    if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw SizeError("mask buffer size does not match " + std::to_string(width) + "x" + std::to_string(height));
    }
    for (auto& b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

std::size_t BinaryMask::popcount() const noexcept
{
    return static_cast<std::size_t>(std::ranges::count(bits_, std::uint8_t{1}));
}

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t capacity) { parent_.reserve(capacity + 1); parent_.push_back(0); }

    std::uint32_t make()
    {
        const auto id = static_cast<std::uint32_t>(parent_.size());
        parent_.push_back(id);
        return id;
    }

    std::uint32_t find(std::uint32_t x) noexcept
    {
        auto root = x;
        while (parent_[root] != root) {
            root = parent_[root];
        }
        while (parent_[x] != root) {
            const auto next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    // The smaller label always becomes the root, so each root is the label of
    // its component's first pixel in raster order.
    std::uint32_t unite(std::uint32_t a, std::uint32_t b) noexcept
    {
        a = find(a);
        b = find(b);
        if (a == b) {
            return a;
        }
        if (b < a) {
            std::swap(a, b);
        }
        parent_[b] = a;
        return a;
    }

    [[nodiscard]] std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

template <typename IsForeground>
InstanceMap label_impl(int width, int height, Connectivity conn, IsForeground&& fg)
{
    InstanceMap out;
    out.width = width;
    out.height = height;
    out.ids.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);

    const auto w = static_cast<std::size_t>(width);
    const bool diag = conn == Connectivity::eight;
    DisjointSet sets(out.ids.size() / 2 + 1);
    auto& ids = out.ids;

    // Pass 1: provisional labels from already-visited neighbors (W, NW, N, NE).
    for (std::size_t y = 0; y < static_cast<std::size_t>(height); ++y) {
        const std::size_t row = y * w;
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = row + x;
            if (!fg(i)) {
                continue;
            }
            std::uint32_t label = 0;
            auto join = [&](std::uint32_t neighbour) {
                if (neighbour != 0) {
                    label = label == 0 ? neighbour : sets.unite(label, neighbour);
                }
            };
            if (x > 0) {
                join(ids[i - 1]);
            }
            if (y > 0) {
                const std::size_t up = i - w;
                join(ids[up]);
                if (diag) {
                    if (x > 0) {
                        join(ids[up - 1]);
                    }
                    if (x + 1 < w) {
                        join(ids[up + 1]);
                    }
                }
            }
            ids[i] = label != 0 ? label : sets.make();
        }
    }

    // Roots in ascending provisional order get compact IDs in first-encounter order.
    std::vector<std::uint32_t> final_id(sets.size(), 0);
    std::uint32_t next = 0;
    for (std::uint32_t p = 1; p < sets.size(); ++p) {
        const auto root = sets.find(p);
        if (root == p) {
            final_id[p] = ++next;
        } else {
            final_id[p] = final_id[root];
        }
    }
    for (auto& id : ids) {
        id = final_id[id];
    }
    out.count = next;
    return out;
}

} // namespace

InstanceMap label_components(const BinaryMask& mask, Connectivity conn)
{
    const auto bits = mask.data();
    return label_impl(mask.width(), mask.height(), conn, [&](std::size_t i) { return bits[i] != 0; });
}

std::vector<Instance> extract_instances(const LabelMap& label, std::span<const ClassIndex> classes,
                                        Connectivity conn, std::size_t min_area)
{
    std::vector<ClassIndex> wanted(classes.begin(), classes.end());
    std::ranges::sort(wanted);
    const auto [dup_begin, dup_end] = std::ranges::unique(wanted);
    wanted.erase(dup_begin, dup_end);
    for (auto c : wanted) {
        if (c >= label.num_classes()) {
            throw RangeError("class " + std::to_string(c) + " is outside [0, " + std::to_string(label.num_classes()) +
                             ")");
        }
    }

    const auto px = label.data();
    const int width = label.width();
    std::vector<Instance> out;
    for (auto c : wanted) {
        const auto map = label_impl(width, label.height(), conn, [&](std::size_t i) { return px[i] == c; });
        if (map.count == 0) {
            continue;
        }
        struct Stats {
            std::size_t area = 0;
            BoundingBox box{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
        };
        std::vector<Stats> stats(map.count + 1);
        for (int y = 0; y < label.height(); ++y) {
            for (int x = 0; x < width; ++x) {
                const auto id = map.at(x, y);
                if (id == 0) {
                    continue;
                }
                auto& s = stats[id];
                ++s.area;
                s.box.min_x = std::min(s.box.min_x, x);
                s.box.min_y = std::min(s.box.min_y, y);
                s.box.max_x = std::max(s.box.max_x, x);
                s.box.max_y = std::max(s.box.max_y, y);
            }
        }
        for (std::uint32_t id = 1; id <= map.count; ++id) {
            const auto& s = stats[id];
            if (s.area < min_area) {
                continue;
            }
            Instance inst;
            inst.id = id;
            inst.class_index = c;
            inst.area = s.area;
            inst.bbox = s.box;
            inst.mask = BinaryMask(s.box.width(), s.box.height());
            for (int y = s.box.min_y; y <= s.box.max_y; ++y) {
                for (int x = s.box.min_x; x <= s.box.max_x; ++x) {
                    if (map.at(x, y) == id) {
                        inst.mask.set(x - s.box.min_x, y - s.box.min_y, true);
                    }
                }
            }
            out.push_back(std::move(inst));
        }
    }
    return out;
}

} // namespace cp2m
