#pragma once

#include <optional>
#include <span>
#include <vector>

#include "saad/matrix.hpp"

namespace saad {

/// How histogram bin widths are chosen: Freedman-Diaconis ("auto") or a
/// caller-supplied fixed width.
struct WidthPolicy {
    enum class Kind { fd_auto, fixed };

    Kind kind = Kind::fd_auto;
    double width = 0.0;

    static WidthPolicy fd() { return {Kind::fd_auto, 0.0}; }
    static WidthPolicy fixed_width(double w) { return {Kind::fixed, w}; }

    bool operator==(const WidthPolicy&) const = default;
};

/// One histogram bin: interval [lower, upper), count and relative frequency.
/// The last bin of a feature is closed at its upper edge.
struct Bin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double rel_freq = 0.0;
};

/// Equal-width histogram of one feature. Bins are contiguous and cover
/// [domain_min, domain_max] without gaps.
struct FeatureBins {
    std::size_t feature_index = 0;
    std::vector<Bin> bins;
    std::size_t total_count = 0;
    double domain_min = 0.0;
    double domain_max = 0.0;
};

/**
 * The fitted unsupervised labeler: per-feature histograms plus the indices
 * of anomalous bins (relative frequency strictly below t), the instance
 * threshold k and the width policy used to build the bins.
 */
struct StatModel {
    std::vector<FeatureBins> per_feature_bins;
    std::vector<std::vector<std::size_t>> per_feature_anomalous;
    double t = 0.05;
    int k = 3;
    WidthPolicy width_policy;

    std::size_t n_features() const { return per_feature_bins.size(); }
};

/**
 * Freedman-Diaconis bin width, 2 * IQR / cbrt(count). Quartiles use linear
 * interpolation between order statistics at position (count - 1) * q.
 *
 * Degenerate spreads fall back: IQR of 0 with a nonzero range uses a
 * Sturges-style width (max - min) / ceil(log2(count) + 1); an all-equal
 * vector returns 0, which build_bins turns into a single unit-width bin.
 */
double fd_bin_width(std::span<const double> values);

/// Equal-width histogram starting at min(values) with
/// ceil((max - min) / width) bins; the last bin is clamped to max(values)
/// and closed. All-equal inputs produce one bin [v - 0.5, v + 0.5].
FeatureBins build_bins(std::span<const double> values, const WidthPolicy& policy);

/**
 * Fits the labeler on a feature matrix: builds per-feature histograms and
 * collects every bin with rel_freq < t as anomalous. Labels are never
 * consumed here; the procedure is unsupervised by construction.
 */
StatModel select_anomalous_bins(const Matrix& features, double t,
                                const WidthPolicy& policy, int k);

/// Index of the bin containing x, or nullopt when x lies outside
/// [domain_min, domain_max]. Interior edges belong to the right bin.
std::optional<std::size_t> bin_of_value(double x, const FeatureBins& fb);

/**
 * Labels one instance: counts features whose value falls in an anomalous
 * bin (values outside the fitted domain count as anomalous) and returns 1
 * iff the count reaches model.k.
 */
int label_instance(std::span<const double> row, const StatModel& model);

/// Row-wise label_instance, order preserving.
std::vector<int> label_dataset(const Matrix& features, const StatModel& model);

/**
 * Picks t from a fixed candidate grid so that the artificial anomaly rate
 * comes closest to target_rate; ties go to the smaller t.
 */
double calibrate_t(const Matrix& features, int k, double target_rate,
                   const WidthPolicy& policy);

/// The candidate grid used by calibrate_t.
std::span<const double> calibrate_t_grid();

} // namespace saad
