#include "cp2m/metrics.hpp"

#include "cp2m/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cp2m {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes)
{
    if (num_classes < 1 || num_classes > kMaxClasses) {
        throw RangeError("confusion matrix needs 1..256 classes, got " + std::to_string(num_classes));
    }
    counts_.assign(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0);
}

std::uint64_t ConfusionMatrix::total() const noexcept
{
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept
{
    std::uint64_t t = 0;
    for (int c = 0; c < num_classes_; ++c) {
        t += (*this)(c, c);
    }
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other)
{
    if (other.num_classes_ != num_classes_) {
        throw SizeError("cannot merge confusion matrices of " + std::to_string(num_classes_) + " and " +
                        std::to_string(other.num_classes_) + " classes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
    return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes,
                          std::optional<ClassIndex> ignore_index)
{
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
        throw SizeError("prediction is " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                        " but ground truth is " + std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    }
    ConfusionMatrix cm(num_classes);
    const auto p = pred.data();
    const auto g = gt.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (ignore_index && g[i] == *ignore_index) {
            continue;
        }
        if (g[i] >= num_classes || p[i] >= num_classes) {
            throw RangeError("class " + std::to_string(std::max(g[i], p[i])) + " at pixel " + std::to_string(i) +
                             " is outside [0, " + std::to_string(num_classes) + ")");
        }
        cm.add(g[i], p[i]);
    }
    return cm;
}

ClassIou iou_per_class(const ConfusionMatrix& cm)
{
    const int n = cm.num_classes();
    ClassIou out;
    out.iou.assign(static_cast<std::size_t>(n), 0.0);
    out.present.assign(static_cast<std::size_t>(n), false);
    for (int c = 0; c < n; ++c) {
        const std::uint64_t tp = cm(c, c);
        std::uint64_t fp = 0;
        std::uint64_t fn = 0;
        for (int o = 0; o < n; ++o) {
            if (o != c) {
                fp += cm(o, c);
                fn += cm(c, o);
            }
        }
        const auto denom = tp + fp + fn;
        if (denom > 0) {
            out.present[static_cast<std::size_t>(c)] = true;
            out.iou[static_cast<std::size_t>(c)] = static_cast<double>(tp) / static_cast<double>(denom);
        }
    }
    return out;
}

double miou(const ConfusionMatrix& cm)
{
    // Ratios and their mean are formed in extended precision from the integer
    // counts, so the result is the double nearest the exact rational mean.
    const int n = cm.num_classes();
    long double sum = 0.0L;
    int present = 0;
    for (int c = 0; c < n; ++c) {
        std::uint64_t denom = 0;
        for (int o = 0; o < n; ++o) {
            denom += cm(c, o) + (o != c ? cm(o, c) : 0);
        }
        if (denom > 0) {
            sum += static_cast<long double>(cm(c, c)) / static_cast<long double>(denom);
            ++present;
        }
    }
    if (present == 0) {
        throw EmptyEvaluationError("no class is present in the confusion matrix");
    }
    return static_cast<double>(sum / present);
}

double pixel_accuracy(const ConfusionMatrix& cm)
{
    const auto total = cm.total();
    if (total == 0) {
        throw EmptyEvaluationError("confusion matrix is empty");
    }
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

namespace {

void check_shapes(const PixelScores& scores, const LabelMap& gt, const LossParams& params)
{
    if (scores.num_classes < 1 ||
        scores.values.size() != scores.num_pixels * static_cast<std::size_t>(scores.num_classes)) {
        throw SizeError("score buffer does not match num_pixels x num_classes");
    }
    if (scores.num_pixels != gt.data().size()) {
        throw SizeError("score buffer covers " + std::to_string(scores.num_pixels) + " pixels but the label has " +
                        std::to_string(gt.data().size()));
    }
    if (params.class_weights.size() != static_cast<std::size_t>(scores.num_classes)) {
        throw SizeError("expected " + std::to_string(scores.num_classes) + " class weights, got " +
                        std::to_string(params.class_weights.size()));
    }
    for (auto c : gt.data()) {
        if (c >= scores.num_classes) {
            throw RangeError("ground-truth class " + std::to_string(c) + " outside the score classes");
        }
    }
}

} // namespace

double weighted_ce(const PixelScores& probs, const LabelMap& gt, const LossParams& params,
                   std::span<const double> theta)
{
    check_shapes(probs, gt, params);
    if (params.lambda < 0.0) {
        throw ValidationError("lambda must be non-negative");
    }
    const auto n = static_cast<std::size_t>(probs.num_classes);
    const auto labels = gt.data();
    double data_term = 0.0;
    for (std::size_t i = 0; i < probs.num_pixels; ++i) {
        const auto row = std::span(probs.values).subspan(i * n, n);
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) {
                throw ValidationError("pixel " + std::to_string(i) + " has a negative or NaN probability");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbSumTolerance) {
            throw ValidationError("pixel " + std::to_string(i) + " probabilities sum to " + std::to_string(sum));
        }
        const auto g = labels[i];
        data_term -= params.class_weights[g] * std::log(std::max(row[g], kLogEpsilon));
    }
    if (probs.num_pixels > 0) {
        data_term /= static_cast<double>(probs.num_pixels);
    }

    double reg = 0.0;
    for (double t : theta) {
        reg += params.reg == Regularizer::l1 ? std::abs(t) : t * t;
    }
    return data_term + params.lambda * reg;
}

PixelScores softmax(const PixelScores& logits)
{
    PixelScores out = logits;
    const auto n = static_cast<std::size_t>(logits.num_classes);
    for (std::size_t i = 0; i < logits.num_pixels; ++i) {
        auto row = std::span(out.values).subspan(i * n, n);
        const double mx = *std::ranges::max_element(row);
        double sum = 0.0;
        for (auto& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (auto& v : row) {
            v /= sum;
        }
    }
    return out;
}

std::vector<double> ce_gradient(const PixelScores& logits, const LabelMap& gt, const LossParams& params)
{
    check_shapes(logits, gt, params);
    const auto probs = softmax(logits);
    const auto n = static_cast<std::size_t>(logits.num_classes);
    const auto labels = gt.data();
    const double scale = logits.num_pixels > 0 ? 1.0 / static_cast<double>(logits.num_pixels) : 0.0;
    std::vector<double> grad(probs.values.size());
    for (std::size_t i = 0; i < logits.num_pixels; ++i) {
        const auto g = labels[i];
        const double w = params.class_weights[g] * scale;
        for (std::size_t c = 0; c < n; ++c) {
            const double target = c == g ? 1.0 : 0.0;
            grad[i * n + c] = w * (probs.values[i * n + c] - target);
        }
    }
    return grad;
}

} // namespace cp2m
