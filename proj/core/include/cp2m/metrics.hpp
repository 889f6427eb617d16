#pragma once

#include "cp2m/raster.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cp2m {

/// counts(g, p): pixels with ground truth g predicted as p.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int num_classes);

    [[nodiscard]] int num_classes() const noexcept { return num_classes_; }
    [[nodiscard]] std::uint64_t operator()(int gt, int pred) const noexcept
    {
        return counts_[static_cast<std::size_t>(gt) * static_cast<std::size_t>(num_classes_) +
                       static_cast<std::size_t>(pred)];
    }
    void add(int gt, int pred, std::uint64_t n = 1) noexcept
    {
        counts_[static_cast<std::size_t>(gt) * static_cast<std::size_t>(num_classes_) +
                static_cast<std::size_t>(pred)] += n;
    }
    [[nodiscard]] std::uint64_t total() const noexcept;
    [[nodiscard]] std::uint64_t trace() const noexcept;

    /// Element-wise sum. Throws SizeError on class-count mismatch.
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    int num_classes_ = 0;
    std::vector<std::uint64_t> counts_;
};

/// Tallies pred against gt. Pixels whose gt equals `ignore_index` are skipped.
[[nodiscard]] ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes,
                                        std::optional<ClassIndex> ignore_index = std::nullopt);

struct ClassIou {
    std::vector<double> iou;   ///< TP / (TP + FP + FN); 0 for absent classes
    std::vector<bool> present; ///< false when TP + FP + FN == 0
};

[[nodiscard]] ClassIou iou_per_class(const ConfusionMatrix& cm);

/// Mean IoU over present classes. Throws EmptyEvaluationError when none is present.
[[nodiscard]] double miou(const ConfusionMatrix& cm);

/// Overall pixel accuracy, trace / total. Throws EmptyEvaluationError on an empty matrix.
[[nodiscard]] double pixel_accuracy(const ConfusionMatrix& cm);

enum class Regularizer { l1, l2 };

struct LossParams {
    std::vector<double> class_weights;
    double lambda = 0.0;
    Regularizer reg = Regularizer::l2;
};

/// Log argument floor for the cross-entropy.
inline constexpr double kLogEpsilon = 1e-12;
/// Allowed deviation of a per-pixel distribution's sum from 1.
inline constexpr double kProbSumTolerance = 1e-9;

/// Row-major per-pixel class values: values[i * num_classes + c].
struct PixelScores {
    std::size_t num_pixels = 0;
    int num_classes = 0;
    std::vector<double> values;
};

/// Mean over pixels of -w[gt] * log(max(p[gt], eps)), plus lambda * R(theta).
///
/// R is sum |theta| (L1) or sum theta^2 (L2). Throws ValidationError when a
/// pixel's distribution is negative or does not sum to 1 within tolerance.
[[nodiscard]] double weighted_ce(const PixelScores& probs, const LabelMap& gt, const LossParams& params,
                                 std::span<const double> theta);

/// Row-wise softmax, numerically stabilised by subtracting the row max.
[[nodiscard]] PixelScores softmax(const PixelScores& logits);

/// Gradient of weighted_ce(softmax(logits)) with respect to the logits:
/// w[g] * (softmax(z) - onehot(g)) / num_pixels per pixel. The regularizer
/// does not depend on the logits and contributes nothing.
[[nodiscard]] std::vector<double> ce_gradient(const PixelScores& logits, const LabelMap& gt,
                                              const LossParams& params);

} // namespace cp2m
