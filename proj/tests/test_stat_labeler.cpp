#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "saad/random.hpp"
#include "saad/stat_labeler.hpp"

using namespace saad;

namespace {

// Brute-force bin lookup: linear scan over intervals, half-open except the
// last bin. Test-side oracle, independent of the binary search.
std::optional<std::size_t> scan_bin(double x, const FeatureBins& fb) {
    for (std::size_t i = 0; i < fb.bins.size(); ++i) {
        const bool last = i + 1 == fb.bins.size();
        if (x >= fb.bins[i].lower && (last ? x <= fb.bins[i].upper : x < fb.bins[i].upper))
            return i;
    }
    return std::nullopt;
}

Matrix single_column(const std::vector<double>& values) {
    Matrix m(values.size(), 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(i, 0) = values[i];
        m(i, 1) = 0.0; // second feature so that k < n is satisfiable
    }
    return m;
}

} // namespace

TEST_CASE("fd_bin_width matches the interpolated-quantile closed form") {
    const std::vector<double> values{1, 2, 3, 4, 5, 6, 7, 8};
    // Q1 = 2.75, Q3 = 6.25, IQR = 3.5, cbrt(8) = 2.
    CHECK(fd_bin_width(values) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("fd_bin_width falls back when the IQR vanishes") {
    const std::vector<double> all_equal{4, 4, 4, 4};
    CHECK(fd_bin_width(all_equal) == 0.0); // degenerate signal, single bin later

    // IQR 0 but spread > 0: Sturges-style fallback width.
    const std::vector<double> spiky{0, 5, 5, 5, 5, 5, 5, 9};
    const double expected = (9.0 - 0.0) / std::ceil(std::log2(8.0) + 1.0);
    CHECK(fd_bin_width(spiky) == doctest::Approx(expected).epsilon(1e-12));

    const std::vector<double> one{3.0};
    CHECK_THROWS_AS(fd_bin_width(one), ValidationError);
}

TEST_CASE("build_bins with a fixed width counts per the half-open convention") {
    const std::vector<double> values{0, 1, 2, 3};
    const FeatureBins fb = build_bins(values, WidthPolicy::fixed_width(2.0));
    REQUIRE(fb.bins.size() == 2);
    CHECK(fb.bins[0].lower == 0.0);
    CHECK(fb.bins[0].upper == 2.0);
    CHECK(fb.bins[1].upper == 3.0);
    CHECK(fb.bins[0].count == 2);
    CHECK(fb.bins[1].count == 2);
    CHECK(fb.bins[0].rel_freq == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fb.bins[1].rel_freq == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("build_bins handles a singleton") {
    const std::vector<double> values{5.0};
    const FeatureBins fb = build_bins(values, WidthPolicy::fd());
    REQUIRE(fb.bins.size() == 1);
    CHECK(fb.bins[0].rel_freq == 1.0);
    CHECK(bin_of_value(5.0, fb) == 0);
    CHECK(fb.bins[0].lower < fb.bins[0].upper);
}

TEST_CASE("build_bins rejects empty input") {
    const std::vector<double> empty;
    CHECK_THROWS_AS(build_bins(empty, WidthPolicy::fd()), ValidationError);
}

TEST_CASE("an interior boundary value lands in the right-hand bin") {
    const std::vector<double> values{0, 1, 2, 3, 4};
    const FeatureBins fb = build_bins(values, WidthPolicy::fixed_width(2.0));
    REQUIRE(fb.bins.size() == 2);
    CHECK(bin_of_value(2.0, fb) == 1);
    CHECK(bin_of_value(4.0, fb) == 1); // last bin closed
    CHECK_FALSE(bin_of_value(-1.0, fb).has_value());
    CHECK_FALSE(bin_of_value(4.5, fb).has_value());
}

TEST_CASE("binning matches a brute-force recount on random inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(1000);
        std::vector<double> values(n);
        for (double& v : values) v = rng.uniform(-50.0, 50.0);
        const double width = rng.uniform(0.5, 20.0);
        const FeatureBins fb = build_bins(values, WidthPolicy::fixed_width(width));

        std::vector<std::size_t> counts(fb.bins.size(), 0);
        for (const double v : values) {
            const auto idx = scan_bin(v, fb);
            REQUIRE(idx.has_value());
            counts[*idx]++;
        }
        std::size_t total = 0;
        double freq_sum = 0.0;
        for (std::size_t i = 0; i < fb.bins.size(); ++i) {
            CHECK(fb.bins[i].count == counts[i]);
            total += fb.bins[i].count;
            freq_sum += fb.bins[i].rel_freq;
        }
        CHECK(total == fb.total_count);
        CHECK(std::abs(freq_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("bin_of_value agrees with a linear scan everywhere") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(300);
        std::vector<double> values(n);
        for (double& v : values) v = rng.uniform(-10.0, 10.0);
        const FeatureBins fb = build_bins(values, WidthPolicy::fd());
        for (int probe = 0; probe < 50; ++probe) {
            const double x = rng.uniform(-12.0, 12.0);
            CHECK(bin_of_value(x, fb) == scan_bin(x, fb));
        }
        // Every in-range value maps to exactly one bin.
        for (const double v : values) CHECK(bin_of_value(v, fb).has_value());
    }
}

TEST_CASE("select_anomalous_bins applies the strict threshold") {
    // 96 values in one bin, 4 in another: rel freqs 0.96 / 0.04.
    std::vector<double> values;
    for (int i = 0; i < 96; ++i) values.push_back(0.5);
    for (int i = 0; i < 4; ++i) values.push_back(2.5);
    const Matrix m = single_column(values);

    const StatModel model = select_anomalous_bins(m, 0.05, WidthPolicy::fixed_width(1.0), 1);
    REQUIRE(model.per_feature_anomalous.size() == 2);
    CHECK(model.per_feature_anomalous[0] == std::vector<std::size_t>{1});

    SUBCASE("bins above the threshold are all common") {
        const StatModel lax = select_anomalous_bins(m, 0.04, WidthPolicy::fixed_width(1.0), 1);
        CHECK(lax.per_feature_anomalous[0].empty()); // 0.04 < 0.04 is false
    }
    SUBCASE("t=0 marks nothing anomalous") {
        const StatModel zero = select_anomalous_bins(m, 0.0, WidthPolicy::fixed_width(1.0), 1);
        for (const auto& a : zero.per_feature_anomalous) CHECK(a.empty());
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(select_anomalous_bins(m, -0.1, WidthPolicy::fd(), 1), ValidationError);
        CHECK_THROWS_AS(select_anomalous_bins(m, 0.05, WidthPolicy::fd(), 2), ValidationError);
        CHECK_THROWS_AS(select_anomalous_bins(m, 0.05, WidthPolicy::fd(), 0), ValidationError);
        CHECK_THROWS_AS(select_anomalous_bins(Matrix{}, 0.05, WidthPolicy::fd(), 1),
                        ValidationError);
    }
}

TEST_CASE("label_instance counts anomalous feature hits against k") {
    // 5 features; build a model by hand: feature j anomalous below 0.
    Matrix m(40, 5);
    Rng rng(5);
    for (std::size_t i = 0; i < 38; ++i)
        for (std::size_t j = 0; j < 5; ++j) m(i, j) = rng.uniform(1.0, 2.0);
    for (std::size_t i = 38; i < 40; ++i)
        for (std::size_t j = 0; j < 5; ++j) m(i, j) = rng.uniform(-2.0, -1.0);

    const StatModel model = select_anomalous_bins(m, 0.2, WidthPolicy::fd(), 3);

    // All features of the last rows sit in sparse bins.
    std::vector<double> anomalous_row(m.row(38).begin(), m.row(38).end());
    CHECK(label_instance(anomalous_row, model) == 1);

    std::vector<double> common_row(m.row(0).begin(), m.row(0).end());
    CHECK(label_instance(common_row, model) == 0);

    SUBCASE("a model with no anomalous bins labels everything 0") {
        const StatModel none = select_anomalous_bins(m, 0.0, WidthPolicy::fd(), 3);
        for (std::size_t i = 0; i < m.rows(); ++i)
            CHECK(label_instance(std::vector<double>(m.row(i).begin(), m.row(i).end()), none) ==
                  0);
    }
    SUBCASE("out-of-range values count as anomalous") {
        const std::vector<double> outside{9.0, 9.0, 9.0, 1.5, 1.5};
        CHECK(label_instance(outside, model) == 1);
    }
    SUBCASE("dimension mismatch") {
        const std::vector<double> tiny{1.0};
        CHECK_THROWS_AS(label_instance(tiny, model), ValidationError);
    }
}

TEST_CASE("label_dataset equals a per-row recount") {
    Rng rng(11);
    Matrix m(200, 4);
    for (double& v : m.storage()) v = rng.normal();
    const StatModel model = select_anomalous_bins(m, 0.05, WidthPolicy::fd(), 2);
    const std::vector<int> labels = label_dataset(m, model);
    REQUIRE(labels.size() == m.rows());

    for (std::size_t i = 0; i < m.rows(); ++i) {
        // Independent recount of anomalous feature hits.
        int hits = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const auto idx = scan_bin(m(i, j), model.per_feature_bins[j]);
            if (!idx) {
                hits++;
                continue;
            }
            const auto& anom = model.per_feature_anomalous[j];
            if (std::find(anom.begin(), anom.end(), *idx) != anom.end()) hits++;
        }
        CHECK(labels[i] == (hits >= model.k ? 1 : 0));
    }
}

TEST_CASE("anomalous bin sets grow monotonically in t") {
    Rng rng(23);
    Matrix m(300, 3);
    for (double& v : m.storage()) v = rng.uniform(0.0, 1.0) < 0.9 ? rng.uniform(0.0, 1.0)
                                                                  : rng.uniform(5.0, 9.0);
    const std::vector<double> thresholds{0.0, 0.01, 0.02, 0.05, 0.1, 0.3, 1.0};
    for (std::size_t i = 0; i + 1 < thresholds.size(); ++i) {
        const StatModel lo = select_anomalous_bins(m, thresholds[i], WidthPolicy::fd(), 1);
        const StatModel hi = select_anomalous_bins(m, thresholds[i + 1], WidthPolicy::fd(), 1);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const std::set<std::size_t> small(lo.per_feature_anomalous[j].begin(),
                                              lo.per_feature_anomalous[j].end());
            const std::set<std::size_t> large(hi.per_feature_anomalous[j].begin(),
                                              hi.per_feature_anomalous[j].end());
            CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
        }
    }
}

TEST_CASE("labeled anomaly sets shrink monotonically in k") {
    Rng rng(31);
    Matrix m(250, 6);
    for (double& v : m.storage()) v = rng.uniform(0.0, 1.0) < 0.85 ? rng.uniform(0.0, 1.0)
                                                                   : rng.uniform(4.0, 8.0);
    std::vector<std::vector<int>> labels_by_k;
    for (int k = 1; k <= 5; ++k) {
        const StatModel model = select_anomalous_bins(m, 0.1, WidthPolicy::fd(), k);
        labels_by_k.push_back(label_dataset(m, model));
    }
    for (std::size_t k = 0; k + 1 < labels_by_k.size(); ++k)
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (labels_by_k[k + 1][i] == 1) CHECK(labels_by_k[k][i] == 1);
}

TEST_CASE("fitting is deterministic") {
    Rng rng(59);
    Matrix m(100, 3);
    for (double& v : m.storage()) v = rng.uniform(-3.0, 3.0);
    const StatModel a = select_anomalous_bins(m, 0.05, WidthPolicy::fd(), 2);
    const StatModel b = select_anomalous_bins(m, 0.05, WidthPolicy::fd(), 2);
    REQUIRE(a.n_features() == b.n_features());
    for (std::size_t j = 0; j < a.n_features(); ++j) {
        CHECK(a.per_feature_anomalous[j] == b.per_feature_anomalous[j]);
        REQUIRE(a.per_feature_bins[j].bins.size() == b.per_feature_bins[j].bins.size());
        for (std::size_t i = 0; i < a.per_feature_bins[j].bins.size(); ++i) {
            CHECK(a.per_feature_bins[j].bins[i].lower == b.per_feature_bins[j].bins[i].lower);
            CHECK(a.per_feature_bins[j].bins[i].upper == b.per_feature_bins[j].bins[i].upper);
            CHECK(a.per_feature_bins[j].bins[i].count == b.per_feature_bins[j].bins[i].count);
        }
    }
}

TEST_CASE("calibrate_t picks the grid point closest to the target rate") {
    Rng rng(67);
    Matrix m(400, 3);
    for (double& v : m.storage()) v = rng.uniform(0.0, 1.0) < 0.9 ? rng.uniform(0.0, 1.0)
                                                                  : rng.uniform(6.0, 10.0);
    const double target = 0.1;
    const double chosen = calibrate_t(m, 1, target, WidthPolicy::fd());

    // Exhaustive grid evaluation oracle.
    double best_err = 1e300;
    for (const double t : calibrate_t_grid()) {
        const StatModel model = select_anomalous_bins(m, t, WidthPolicy::fd(), 1);
        const std::vector<int> labels = label_dataset(m, model);
        const double rate = double(std::count(labels.begin(), labels.end(), 1)) /
                            double(labels.size());
        best_err = std::min(best_err, std::abs(rate - target));
    }
    const StatModel chosen_model = select_anomalous_bins(m, chosen, WidthPolicy::fd(), 1);
    const std::vector<int> chosen_labels = label_dataset(m, chosen_model);
    const double chosen_rate =
        double(std::count(chosen_labels.begin(), chosen_labels.end(), 1)) /
        double(chosen_labels.size());
    CHECK(std::abs(chosen_rate - target) == doctest::Approx(best_err).epsilon(1e-12));

    SUBCASE("ties break toward the smaller t") {
        // A flat dataset gives the same rate (0) at every grid point.
        Matrix flat(50, 2);
        for (std::size_t i = 0; i < 50; ++i) {
            flat(i, 0) = double(i % 5);
            flat(i, 1) = 1.0;
        }
        CHECK(calibrate_t(flat, 1, 0.5, WidthPolicy::fd()) == calibrate_t_grid().front());
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(calibrate_t(Matrix{}, 1, 0.1, WidthPolicy::fd()), ValidationError);
        CHECK_THROWS_AS(calibrate_t(m, 1, 0.0, WidthPolicy::fd()), ValidationError);
    }
}
