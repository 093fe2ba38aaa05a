#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "saad/config.hpp"

using namespace saad;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("a full config parses into every section") {
    const auto path = write_config("saad_cfg_full.json", R"({
        "seed": 7,
        "out_dir": "runs/x",
        "columns": {"target_column": "anomaly", "categorical_columns": ["mode"]},
        "stat": {"t": 0.02, "k": 4, "width_policy": "fixed", "fixed_width": 1.5,
                 "fit_on": "train"},
        "network": {"hidden_sizes": [8, 4], "dropout_rates": [0.1, 0.1],
                    "learning_rate": 0.01, "max_epochs": 50},
        "aggregation": {"a": 0.9, "b": 0.1, "beta": 2.0,
                        "a_values": [0.9, 1.0], "b_values": [0.0]},
        "synth": {
            "train": {"n_maneuvers": 3, "samples_per_maneuver": 10,
                      "speed_range": [0, 120], "anomaly_rate": 0.2},
            "test": {"n_maneuvers": 2, "samples_per_maneuver": 5},
            "anomaly": {"affected_feature_count": 3, "mode": "drift"}
        },
        "paths": {"train_csv": "tr.csv", "test_csv": "te.csv"}
    })");
    const RunConfig cfg = load_run_config(path);
    CHECK(cfg.seed == 7);
    CHECK(cfg.out_dir == fs::path("runs/x"));
    CHECK(cfg.columns.target_column == "anomaly");
    CHECK(cfg.columns.categorical_columns == std::vector<std::string>{"mode"});
    CHECK(cfg.stat.t == 0.02);
    CHECK(cfg.stat.k == 4);
    CHECK(cfg.stat.width_policy == WidthPolicy::fixed_width(1.5));
    CHECK(cfg.stat.fit_on == "train");
    CHECK(cfg.network.hidden_sizes == std::vector<std::size_t>{8, 4});
    CHECK(cfg.network.learning_rate == 0.01);
    CHECK(cfg.network.max_epochs == 50);
    CHECK(cfg.aggregation.a == 0.9);
    CHECK(cfg.aggregation.b == 0.1);
    CHECK(cfg.f_beta_value == 2.0);
    CHECK(cfg.a_values == std::vector<double>{0.9, 1.0});
    CHECK(cfg.synth_train.n_maneuvers == 3);
    CHECK(cfg.synth_train.speed_max == 120.0);
    CHECK(cfg.synth_test.samples_per_maneuver == 5);
    CHECK(cfg.anomaly.affected_feature_count == 3);
    CHECK(cfg.anomaly.mode == AnomalySpec::Mode::drift);
    CHECK(cfg.train_csv == "tr.csv");
    CHECK(cfg.resolve("tr.csv") == fs::path("runs/x") / "tr.csv");
}

TEST_CASE("defaults hold when sections are omitted") {
    const auto path = write_config("saad_cfg_min.json", R"({"seed": 1})");
    const RunConfig cfg = load_run_config(path);
    CHECK(cfg.columns.target_column == "anomaly");
    CHECK(cfg.stat.t == 0.05);
    CHECK(cfg.stat.k == 3);
    CHECK(cfg.stat.width_policy == WidthPolicy::fd());
    CHECK(cfg.network.hidden_sizes == std::vector<std::size_t>{32, 16});
    CHECK(cfg.aggregation.a == 0.97);
    CHECK(cfg.a_values.empty());
}

TEST_CASE("unknown keys and bad values are rejected") {
    const auto typo = write_config("saad_cfg_typo.json", R"({"sede": 1})");
    CHECK_THROWS_AS(load_run_config(typo), ValidationError);

    const auto nested =
        write_config("saad_cfg_typo2.json", R"({"stat": {"thresh": 0.1}})");
    CHECK_THROWS_AS(load_run_config(nested), ValidationError);

    const auto bad_policy = write_config("saad_cfg_policy.json",
                                         R"({"stat": {"width_policy": "magic"}})");
    CHECK_THROWS_AS(load_run_config(bad_policy), ValidationError);

    const auto bad_mode = write_config("saad_cfg_mode.json",
                                       R"({"synth": {"anomaly": {"mode": "wobble"}}})");
    CHECK_THROWS_AS(load_run_config(bad_mode), ValidationError);

    const auto not_json = write_config("saad_cfg_broken.json", "{seed:");
    CHECK_THROWS_AS(load_run_config(not_json), ValidationError);

    CHECK_THROWS_AS(load_run_config("/nonexistent/cfg.json"), IoError);
}
