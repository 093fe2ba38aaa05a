#include "saad/aggregator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "saad/log.hpp"

namespace saad {

namespace {

void warn_if_out_of_band(const AggregationParams& params) {
    if (params.a < 0.5 || params.a > 1.0)
        log_warn("aggregation threshold a=" + std::to_string(params.a) +
                 " lies outside the conventional band [0.5, 1]");
    if (params.b < 0.0 || params.b > 0.5)
        log_warn("aggregation threshold b=" + std::to_string(params.b) +
                 " lies outside the conventional band [0, 0.5]");
}

std::size_t rule_of(const LabeledPair& pair, const AggregationParams& params) {
    if (pair.stat_label == 0 && pair.dl_label == 0) return 0;
    if (pair.stat_label == 1 && pair.dl_label == 1) return 1;
    if (pair.stat_label == 0) return pair.confidence > params.a ? 2 : 3;
    return pair.confidence < params.b ? 4 : 5;
}

constexpr int kRuleResult[6] = {0, 1, 1, 0, 1, 0};

std::string format_axis(double value) {
    if (value == 1.0) return "1";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string format_full(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_table_csv(const SweepGrid& grid, const std::filesystem::path& path,
                     const Matrix& cells, const char* cell_format, double scale) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

    out << "b\\a";
    for (const double a : grid.a_values) out << ',' << format_axis(a);
    out << '\n';

    char buf[32];
    for (std::size_t bi = 0; bi < grid.b_values.size(); ++bi) {
        out << format_axis(grid.b_values[bi]);
        for (std::size_t ai = 0; ai < grid.a_values.size(); ++ai) {
            const double value = cells(bi, ai);
            if (std::isnan(value)) {
                out << ",NA";
            } else {
                std::snprintf(buf, sizeof(buf), cell_format, value * scale);
                out << ',' << buf;
            }
        }
        out << '\n';
    }
}

} // namespace

int aggregate(const LabeledPair& pair, const AggregationParams& params) {
    return kRuleResult[rule_of(pair, params)];
}

std::vector<int> aggregate_batch(std::span<const LabeledPair> pairs,
                                 const AggregationParams& params) {
    warn_if_out_of_band(params);
    std::vector<int> out;
    out.reserve(pairs.size());
    for (const LabeledPair& pair : pairs) out.push_back(aggregate(pair, params));
    return out;
}

SweepGrid sweep(std::span<const LabeledPair> pairs, std::span<const int> truth,
                std::vector<double> a_values, std::vector<double> b_values) {
    if (pairs.size() != truth.size())
        throw ValidationError("sweep: pairs and truth differ in length");
    if (a_values.empty() || b_values.empty())
        throw ValidationError("sweep: axis vectors must not be empty");
    if (pairs.empty()) throw ValidationError("sweep: empty input");

    SweepGrid grid;
    grid.a_values = std::move(a_values);
    grid.b_values = std::move(b_values);
    grid.accuracy = Matrix(grid.b_values.size(), grid.a_values.size());
    grid.f1 = Matrix(grid.b_values.size(), grid.a_values.size());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t bi = 0; bi < grid.b_values.size(); ++bi) {
        for (std::size_t ai = 0; ai < grid.a_values.size(); ++ai) {
            const AggregationParams params{grid.a_values[ai], grid.b_values[bi]};
            std::vector<int> labels;
            labels.reserve(pairs.size());
            for (const LabeledPair& pair : pairs) labels.push_back(aggregate(pair, params));
            const MetricsReport rep = report(labels, truth);
            grid.accuracy(bi, ai) = rep.accuracy;
            grid.f1(bi, ai) = rep.f1 ? *rep.f1 : nan;
        }
    }
    return grid;
}

DisagreementReport decompose_disagreements(std::span<const LabeledPair> pairs,
                                           const AggregationParams& params) {
    warn_if_out_of_band(params);
    DisagreementReport report;
    for (const LabeledPair& pair : pairs) report.rule_counts[rule_of(pair, params)] += 1;
    return report;
}

std::vector<double> default_a_values() {
    std::vector<double> values;
    for (int i = 51; i <= 55; ++i) values.push_back(i / 100.0);
    for (int i = 60; i <= 95; i += 5) values.push_back(i / 100.0);
    for (int i = 96; i <= 100; ++i) values.push_back(i / 100.0);
    return values;
}

std::vector<double> default_b_values() {
    std::vector<double> values;
    for (int i = 0; i <= 5; ++i) values.push_back(i / 100.0);
    for (int i = 10; i <= 45; i += 5) values.push_back(i / 100.0);
    for (int i = 46; i <= 50; ++i) values.push_back(i / 100.0);
    return values;
}

void write_sweep_accuracy_csv(const SweepGrid& grid, const std::filesystem::path& path) {
    write_table_csv(grid, path, grid.accuracy, "%.1f", 100.0);
}

void write_sweep_f1_csv(const SweepGrid& grid, const std::filesystem::path& path) {
    write_table_csv(grid, path, grid.f1, "%.2f", 1.0);
}

void write_sweep_long_csv(const SweepGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "b,a,accuracy,f1\n";
    for (std::size_t bi = 0; bi < grid.b_values.size(); ++bi) {
        for (std::size_t ai = 0; ai < grid.a_values.size(); ++ai) {
            out << format_full(grid.b_values[bi]) << ',' << format_full(grid.a_values[ai]) << ','
                << format_full(grid.accuracy(bi, ai)) << ',';
            const double f1 = grid.f1(bi, ai);
            out << (std::isnan(f1) ? "NA" : format_full(f1)) << '\n';
        }
    }
}

void write_sweep_json(const SweepGrid& grid, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["a_values"] = grid.a_values;
    doc["b_values"] = grid.b_values;
    auto matrix_to_json = [&](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t bi = 0; bi < m.rows(); ++bi) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t ai = 0; ai < m.cols(); ++ai) {
                const double value = m(bi, ai);
                if (std::isnan(value))
                    row.push_back(nullptr);
                else
                    row.push_back(value);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    };
    doc["accuracy"] = matrix_to_json(grid.accuracy);
    doc["f1"] = matrix_to_json(grid.f1);

    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << doc.dump(2) << '\n';
}

} // namespace saad
