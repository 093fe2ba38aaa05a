#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saad/aggregator.hpp"
#include "saad/dataset.hpp"
#include "saad/fcn.hpp"
#include "saad/stat_labeler.hpp"
#include "saad/synth.hpp"

namespace saad {

/// Parameters of the statistical labeler stage.
struct StatConfig {
    double t = 0.05;
    int k = 3;
    WidthPolicy width_policy = WidthPolicy::fd();
    std::string fit_on = "test"; // which split fit-stat labels: "train" | "test"
};

/// Full run configuration, loaded from a JSON file. Flags override fields.
struct RunConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";

    ColumnSpec columns;
    StatConfig stat;
    NetworkConfig network;
    AggregationParams aggregation;
    double f_beta_value = 1.0;
    std::vector<double> a_values; // empty -> default grid
    std::vector<double> b_values;

    ManeuverConfig synth_train;
    ManeuverConfig synth_test;
    AnomalySpec anomaly;

    std::string train_csv = "train.csv"; // relative paths resolve under out_dir
    std::string test_csv = "test.csv";

    std::filesystem::path resolve(const std::string& file) const {
        const std::filesystem::path p(file);
        return p.is_absolute() ? p : out_dir / p;
    }
};

/// Parses the JSON config file. Unknown keys are rejected to catch typos.
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace saad
