#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "saad/dataset.hpp"

using namespace saad;
namespace fs = std::filesystem;

namespace {

fs::path write_temp_csv(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

ColumnSpec spec_s1_s2_y() {
    ColumnSpec spec;
    spec.selected_features = {"s1", "s2"};
    spec.target_column = "y";
    return spec;
}

} // namespace

TEST_CASE("load_csv parses features and target") {
    const auto path = write_temp_csv("saad_basic.csv", "s1,s2,y\n1.0,2.0,0\n3.0,4.0,1\n");
    const Dataset ds = load_csv(path, spec_s1_s2_y());
    CHECK(ds.n_rows() == 2);
    CHECK(ds.n_cols() == 2);
    CHECK(ds.features(0, 0) == 1.0);
    CHECK(ds.features(1, 1) == 4.0);
    REQUIRE(ds.labels.has_value());
    CHECK(ds.int_labels() == std::vector<int>{0, 1});
    CHECK(ds.row_ids.size() == 2);
}

TEST_CASE("load_csv reports a missing column") {
    const auto path = write_temp_csv("saad_missing_col.csv", "s1,s2,y\n1,2,0\n");
    ColumnSpec spec = spec_s1_s2_y();
    spec.selected_features = {"s1", "s9"};
    CHECK_THROWS_AS(load_csv(path, spec), ValidationError);
}

TEST_CASE("load_csv rejects non-numeric cells outside categorical columns") {
    const auto path = write_temp_csv("saad_non_numeric.csv", "s1,s2,y\nfoo,2,0\n");
    CHECK_THROWS_AS(load_csv(path, spec_s1_s2_y()), ValidationError);
}

TEST_CASE("load_csv errors on an absent file and an empty data section") {
    CHECK_THROWS_AS(load_csv("/nonexistent/saad.csv", spec_s1_s2_y()), IoError);
    const auto path = write_temp_csv("saad_header_only.csv", "s1,s2,y\n");
    CHECK_THROWS_AS(load_csv(path, spec_s1_s2_y()), ValidationError);
}

TEST_CASE("ColumnSpec validation") {
    ColumnSpec empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    ColumnSpec overlap;
    overlap.selected_features = {"a", "y"};
    overlap.target_column = "y";
    CHECK_THROWS_AS(overlap.validate(), ValidationError);
}

TEST_CASE("clean_rows drops rows with missing values and keeps order") {
    const auto path = write_temp_csv("saad_missing.csv",
                                     "s1,s2,y\n1,10,0\n2,NaN,0\n3,30,1\n");
    const Dataset ds = load_csv(path, spec_s1_s2_y());
    CHECK(ds.n_rows() == 3);
    const Dataset cleaned = clean_rows(ds);
    CHECK(cleaned.n_rows() == 2);
    CHECK(cleaned.features(0, 0) == 1.0);
    CHECK(cleaned.features(1, 0) == 3.0);
    CHECK(cleaned.row_ids[0] == ds.row_ids[0]);
    CHECK(cleaned.row_ids[1] == ds.row_ids[2]);
}

TEST_CASE("clean_rows is the identity on complete data") {
    const auto path = write_temp_csv("saad_complete.csv", "s1,s2,y\n1,2,0\n3,4,1\n");
    const Dataset ds = load_csv(path, spec_s1_s2_y());
    const Dataset cleaned = clean_rows(ds);
    CHECK(cleaned.features == ds.features);
    CHECK(cleaned.labels == ds.labels);
}

TEST_CASE("clean_rows rejects a dataset that loses every row") {
    const auto path = write_temp_csv("saad_all_missing.csv", "s1,s2,y\nnan,1,0\n,2,1\n");
    const Dataset ds = load_csv(path, spec_s1_s2_y());
    CHECK_THROWS_AS(clean_rows(ds), ComputeError);
}

TEST_CASE("encode_categoricals assigns codes in first-appearance order") {
    const auto path = write_temp_csv("saad_cat.csv", "mode,s2,y\nB,1,0\nA,2,0\nB,3,1\n");
    ColumnSpec spec;
    spec.selected_features = {"mode", "s2"};
    spec.target_column = "y";
    spec.categorical_columns = {"mode"};
    const Dataset ds = clean_rows(load_csv(path, spec));
    const EncodeResult encoded = encode_categoricals(ds, spec);
    CHECK(encoded.data.features(0, 0) == 0.0);
    CHECK(encoded.data.features(1, 0) == 1.0);
    CHECK(encoded.data.features(2, 0) == 0.0);
    CHECK(encoded.data.text_cells.empty());
    REQUIRE(encoded.maps.contains("mode"));
    CHECK(encoded.maps.at("mode").categories == std::vector<std::string>{"B", "A"});

    SUBCASE("a numeric column not listed stays unchanged") {
        CHECK(encoded.data.features(2, 1) == 3.0);
    }

    SUBCASE("an unseen category at inference time errors") {
        const auto infer_path =
            write_temp_csv("saad_cat_infer.csv", "mode,s2,y\nC,1,0\n");
        const Dataset infer_ds = clean_rows(load_csv(infer_path, spec));
        CHECK_THROWS_AS(apply_categorical_maps(infer_ds, spec, encoded.maps),
                        ValidationError);
    }

    SUBCASE("a seen category at inference time reuses the fitted code") {
        const auto infer_path =
            write_temp_csv("saad_cat_infer2.csv", "mode,s2,y\nA,9,0\n");
        const Dataset infer_ds = clean_rows(load_csv(infer_path, spec));
        const Dataset applied = apply_categorical_maps(infer_ds, spec, encoded.maps);
        CHECK(applied.features(0, 0) == 1.0);
    }
}

TEST_CASE("fit_scaler closed forms") {
    Dataset ds;
    ds.feature_names = {"a", "b", "c"};
    ds.features = Matrix::from_rows({{0.0, 5.0, 1.0}, {2.0, 5.0, 2.0}, {1.0, 5.0, 3.0}});
    const ScalerParams params = fit_scaler(ds);
    CHECK(params.means[1] == 5.0);
    CHECK(params.stddevs[1] == 0.0);
    CHECK(params.is_constant(1));
    CHECK(params.means[2] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(params.stddevs[2] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));

    Dataset two;
    two.feature_names = {"a"};
    two.features = Matrix::from_rows({{0.0}, {2.0}});
    const ScalerParams p2 = fit_scaler(two);
    CHECK(p2.means[0] == 1.0);
    CHECK(p2.stddevs[0] == 1.0);
}

TEST_CASE("fit_scaler needs at least two rows") {
    Dataset ds;
    ds.feature_names = {"a"};
    ds.features = Matrix::from_rows({{1.0}});
    CHECK_THROWS_AS(fit_scaler(ds), ValidationError);
}

TEST_CASE("apply_scaler standardizes and zeroes constant columns") {
    Dataset ds;
    ds.feature_names = {"a", "b"};
    ds.features = Matrix::from_rows({{3.0, 7.0}, {1.0, 7.0}});
    ScalerParams params;
    params.means = {1.0, 7.0};
    params.stddevs = {1.0, 0.0};
    const Dataset scaled = apply_scaler(ds, params);
    CHECK(scaled.features(0, 0) == 2.0);
    CHECK(scaled.features(0, 1) == 0.0);
    CHECK(scaled.features(1, 1) == 0.0);

    ScalerParams wrong;
    wrong.means = {0.0};
    wrong.stddevs = {1.0};
    CHECK_THROWS_AS(apply_scaler(ds, wrong), ValidationError);
}

TEST_CASE("rescaling the fit set yields zero mean and unit population stddev") {
    Dataset ds;
    ds.feature_names = {"a", "b", "c"};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 37; ++i)
        rows.push_back({0.5 * i - 3.0, std::sin(i * 0.7) * 12.0, 4.0}); // c is constant
    ds.features = Matrix::from_rows(rows);

    const ScalerParams params = fit_scaler(ds);
    const Dataset scaled = apply_scaler(ds, params);
    const ScalerParams recheck = fit_scaler(scaled);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(recheck.means[j]) < 1e-9);
        CHECK(std::abs(recheck.stddevs[j] - 1.0) < 1e-9);
    }
    CHECK(recheck.means[2] == 0.0);
    CHECK(recheck.stddevs[2] == 0.0);

    // The scaler itself is untouched by applying it.
    const ScalerParams again = fit_scaler(ds);
    CHECK(again.means == params.means);
    CHECK(again.stddevs == params.stddevs);

    // Transforming a held-out set never reads its statistics.
    Dataset held_out;
    held_out.feature_names = ds.feature_names;
    held_out.features = Matrix::from_rows({{100.0, -5.0, 0.0}, {-7.0, 3.0, 9.0}});
    apply_scaler(held_out, params);
    const ScalerParams after = fit_scaler(ds);
    CHECK(after.means == params.means);
    CHECK(after.stddevs == params.stddevs);
}

TEST_CASE("clean/encode/scale is idempotent on prepared data") {
    Dataset ds;
    ds.feature_names = {"a", "b"};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 25; ++i) rows.push_back({0.3 * i - 2.0, std::cos(i * 1.1)});
    ds.features = Matrix::from_rows(rows);

    ColumnSpec spec;
    spec.selected_features = ds.feature_names;

    const Dataset scaled = apply_scaler(ds, fit_scaler(ds));
    const Dataset cleaned = clean_rows(scaled);
    const Dataset encoded = encode_categoricals(cleaned, spec).data;
    const Dataset rescaled = apply_scaler(encoded, fit_scaler(encoded));
    REQUIRE(rescaled.n_rows() == scaled.n_rows());
    for (std::size_t i = 0; i < scaled.n_rows(); ++i)
        for (std::size_t j = 0; j < scaled.n_cols(); ++j)
            CHECK(rescaled.features(i, j) ==
                  doctest::Approx(scaled.features(i, j)).epsilon(1e-9));
}

TEST_CASE("split sizes, determinism and partition") {
    Dataset ds;
    ds.feature_names = {"a"};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({double(i)});
    ds.features = Matrix::from_rows(rows);
    ds.labels = std::vector<double>(10, 0.0);

    const auto [train, test] = split(ds, 0.8, 99);
    CHECK(train.n_rows() == 8);
    CHECK(test.n_rows() == 2);

    const auto [train2, test2] = split(ds, 0.8, 99);
    CHECK(train.features == train2.features);
    CHECK(test.features == test2.features);

    // Disjoint and exhaustive over the original values.
    std::vector<double> seen;
    for (std::size_t i = 0; i < train.n_rows(); ++i) seen.push_back(train.features(i, 0));
    for (std::size_t i = 0; i < test.n_rows(); ++i) seen.push_back(test.features(i, 0));
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < 10; ++i) CHECK(seen[i] == double(i));

    CHECK_THROWS_AS(split(ds, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(split(ds, 0.0, 1), ValidationError);
}
