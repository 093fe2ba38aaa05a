#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace saad {

/// Binary confusion counts; the positive class is 1 (anomaly).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

/**
 * accuracy is always defined for non-empty input; precision, recall and f1
 * carry std::nullopt when a denominator is zero. Degenerate metrics are
 * never silently reported as 0.
 */
struct MetricsReport {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    ConfusionMatrix counts;
};

/// Counts tp/fp/tn/fn over equal-length 0/1 vectors.
ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth);

/// (1 + beta^2) P R / (beta^2 P + R); nullopt when any denominator is 0.
std::optional<double> f_beta(const ConfusionMatrix& cm, double beta);

MetricsReport report(std::span<const int> pred, std::span<const int> truth);

} // namespace saad
