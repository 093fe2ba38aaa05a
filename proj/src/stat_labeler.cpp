#include "saad/stat_labeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace saad {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double resolve_width(std::span<const double> values, const WidthPolicy& policy) {
    if (policy.kind == WidthPolicy::Kind::fixed) {
        if (!(policy.width > 0.0))
            throw ValidationError("build_bins: fixed width must be positive");
        return policy.width;
    }
    return fd_bin_width(values);
}

} // namespace

double fd_bin_width(std::span<const double> values) {
    if (values.size() < 2)
        throw ValidationError("fd_bin_width: need at least 2 values");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    const double iqr = interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);
    if (iqr > 0.0)
        return 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));

    const double range = sorted.back() - sorted.front();
    if (range <= 0.0) return 0.0; // all values equal; caller emits a single bin
    const double sturges_bins = std::ceil(std::log2(static_cast<double>(sorted.size())) + 1.0);
    return range / sturges_bins;
}

FeatureBins build_bins(std::span<const double> values, const WidthPolicy& policy) {
    if (values.empty()) throw ValidationError("build_bins: empty input");

    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *min_it;
    const double hi = *max_it;

    FeatureBins fb;
    fb.total_count = values.size();

    if (hi <= lo) {
        // Degenerate spread: one bin around the single point.
        fb.domain_min = lo - 0.5;
        fb.domain_max = lo + 0.5;
        fb.bins.push_back({fb.domain_min, fb.domain_max, values.size(), 1.0});
        return fb;
    }

    const double width = resolve_width(values, policy);
    if (!(width > 0.0))
        throw ValidationError("build_bins: resolved width is not positive");

    auto n_bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    n_bins = std::max<std::size_t>(n_bins, 1);
    // Guard against a floating-point ceil overshoot leaving an empty last bin.
    while (n_bins > 1 && lo + static_cast<double>(n_bins - 1) * width >= hi) --n_bins;

    fb.domain_min = lo;
    fb.domain_max = hi;
    fb.bins.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        fb.bins[i].lower = lo + static_cast<double>(i) * width;
        fb.bins[i].upper = (i + 1 == n_bins) ? hi : lo + static_cast<double>(i + 1) * width;
    }

    for (const double x : values) {
        const auto idx = bin_of_value(x, fb);
        // Every input lies within [lo, hi] by construction.
        fb.bins[*idx].count += 1;
    }
    for (Bin& bin : fb.bins)
        bin.rel_freq = static_cast<double>(bin.count) / static_cast<double>(fb.total_count);
    return fb;
}

StatModel select_anomalous_bins(const Matrix& features, double t,
                                const WidthPolicy& policy, int k) {
    if (features.rows() == 0 || features.cols() == 0)
        throw ValidationError("select_anomalous_bins: empty dataset");
    if (!(t >= 0.0 && t <= 1.0))
        throw ValidationError("select_anomalous_bins: t must lie in [0, 1]");
    if (k < 1 || static_cast<std::size_t>(k) >= features.cols())
        throw ValidationError("select_anomalous_bins: k must satisfy 1 <= k < n_features");

    StatModel model;
    model.t = t;
    model.k = k;
    model.width_policy = policy;
    model.per_feature_bins.reserve(features.cols());
    model.per_feature_anomalous.reserve(features.cols());

    for (std::size_t j = 0; j < features.cols(); ++j) {
        const std::vector<double> column = features.column(j);
        FeatureBins fb = build_bins(column, policy);
        fb.feature_index = j;

        std::vector<std::size_t> anomalous;
        for (std::size_t i = 0; i < fb.bins.size(); ++i)
            if (fb.bins[i].rel_freq < t) anomalous.push_back(i);

        model.per_feature_bins.push_back(std::move(fb));
        model.per_feature_anomalous.push_back(std::move(anomalous));
    }
    return model;
}

std::optional<std::size_t> bin_of_value(double x, const FeatureBins& fb) {
    if (fb.bins.empty() || x < fb.domain_min || x > fb.domain_max) return std::nullopt;
    // First bin whose lower edge exceeds x, then step back one.
    const auto it = std::upper_bound(fb.bins.begin(), fb.bins.end(), x,
                                     [](double v, const Bin& b) { return v < b.lower; });
    if (it == fb.bins.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - fb.bins.begin()) - 1;
}

int label_instance(std::span<const double> row, const StatModel& model) {
    if (row.size() != model.n_features())
        throw ValidationError("label_instance: instance has " + std::to_string(row.size()) +
                              " features, model expects " + std::to_string(model.n_features()));

    int count = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        const auto idx = bin_of_value(row[j], model.per_feature_bins[j]);
        if (!idx) {
            // Outside the fitted domain: empirical occurrence probability 0.
            ++count;
            continue;
        }
        const auto& anomalous = model.per_feature_anomalous[j];
        if (std::binary_search(anomalous.begin(), anomalous.end(), *idx)) ++count;
    }
    return count >= model.k ? 1 : 0;
}

std::vector<int> label_dataset(const Matrix& features, const StatModel& model) {
    std::vector<int> labels;
    labels.reserve(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        labels.push_back(label_instance(features.row(i), model));
    return labels;
}

std::span<const double> calibrate_t_grid() {
    static constexpr double grid[] = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
    return grid;
}

double calibrate_t(const Matrix& features, int k, double target_rate,
                   const WidthPolicy& policy) {
    if (features.rows() == 0) throw ValidationError("calibrate_t: empty dataset");
    if (!(target_rate > 0.0 && target_rate < 1.0))
        throw ValidationError("calibrate_t: target_rate must lie in (0, 1)");

    // Bins are independent of t; fit them once and vary the anomalous sets.
    StatModel model = select_anomalous_bins(features, 0.0, policy, k);

    double best_t = calibrate_t_grid().front();
    double best_error = std::numeric_limits<double>::infinity();
    for (const double t : calibrate_t_grid()) {
        model.t = t;
        for (std::size_t j = 0; j < model.n_features(); ++j) {
            auto& anomalous = model.per_feature_anomalous[j];
            anomalous.clear();
            const auto& bins = model.per_feature_bins[j].bins;
            for (std::size_t i = 0; i < bins.size(); ++i)
                if (bins[i].rel_freq < t) anomalous.push_back(i);
        }
        const std::vector<int> labels = label_dataset(features, model);
        const double rate = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) /
                            static_cast<double>(labels.size());
        const double error = std::abs(rate - target_rate);
        if (error < best_error) { // strict: ties keep the smaller t
            best_error = error;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace saad
