#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "saad/aggregator.hpp"
#include "saad/config.hpp"
#include "saad/dataset.hpp"
#include "saad/fcn.hpp"
#include "saad/log.hpp"
#include "saad/metrics.hpp"
#include "saad/model_io.hpp"
#include "saad/stat_labeler.hpp"
#include "saad/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitCompute = 4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> beta;
    std::optional<double> calibrate_t_target;
};

saad::RunConfig effective_config(const CommonFlags& flags) {
    saad::RunConfig cfg = saad::load_run_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.a) cfg.aggregation.a = *flags.a;
    if (flags.b) cfg.aggregation.b = *flags.b;
    if (flags.beta) cfg.f_beta_value = *flags.beta;
    return cfg;
}

void require_out_dir(const saad::RunConfig& cfg) {
    if (!fs::is_directory(cfg.out_dir))
        throw saad::IoError("output directory '" + cfg.out_dir.string() +
                            "' does not exist");
}

std::vector<std::string> peek_csv_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw saad::IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw saad::IoError("'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> names;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
    return names;
}

// An empty selected_features list in the config means "every column except
// the target", resolved from the file's header.
saad::ColumnSpec resolve_columns(const saad::RunConfig& cfg, const fs::path& csv) {
    saad::ColumnSpec spec = cfg.columns;
    if (spec.selected_features.empty()) {
        for (const std::string& name : peek_csv_header(csv))
            if (!spec.target_column || name != *spec.target_column)
                spec.selected_features.push_back(name);
    }
    return spec;
}

struct PreparedData {
    saad::Dataset data; // cleaned and encoded, unscaled
    saad::ColumnSpec spec;
    saad::CategoricalMaps maps;
};

PreparedData load_prepared(const saad::RunConfig& cfg, const fs::path& csv) {
    PreparedData out;
    out.spec = resolve_columns(cfg, csv);
    const saad::Dataset raw = saad::load_csv(csv, out.spec);
    const saad::Dataset cleaned = saad::clean_rows(raw);
    auto encoded = saad::encode_categoricals(cleaned, out.spec);
    out.data = std::move(encoded.data);
    out.maps = std::move(encoded.maps);
    return out;
}

PreparedData load_prepared_with_maps(const saad::RunConfig& cfg, const fs::path& csv,
                                     const saad::CategoricalMaps& maps) {
    PreparedData out;
    out.spec = resolve_columns(cfg, csv);
    const saad::Dataset raw = saad::load_csv(csv, out.spec);
    const saad::Dataset cleaned = saad::clean_rows(raw);
    out.data = saad::apply_categorical_maps(cleaned, out.spec, maps);
    out.maps = maps;
    return out;
}

int cmd_generate(const CommonFlags& flags) {
    saad::RunConfig cfg = effective_config(flags);
    require_out_dir(cfg);

    cfg.synth_train.seed = saad::derive_seed(cfg.seed, "synth.train");
    cfg.synth_test.seed = saad::derive_seed(cfg.seed, "synth.test");

    const std::string target = cfg.columns.target_column.value_or("anomaly");
    const saad::Dataset train = saad::generate(cfg.synth_train, cfg.anomaly);
    const saad::Dataset test = saad::generate(cfg.synth_test, cfg.anomaly);
    saad::write_csv(train, cfg.resolve(cfg.train_csv), target);
    saad::write_csv(test, cfg.resolve(cfg.test_csv), target);

    std::cout << "wrote " << cfg.resolve(cfg.train_csv).string() << " (" << train.n_rows()
              << " rows) and " << cfg.resolve(cfg.test_csv).string() << " (" << test.n_rows()
              << " rows)\n";
    return 0;
}

int cmd_fit_stat(const CommonFlags& flags) {
    saad::RunConfig cfg = effective_config(flags);
    require_out_dir(cfg);

    const fs::path input =
        cfg.resolve(cfg.stat.fit_on == "train" ? cfg.train_csv : cfg.test_csv);
    const PreparedData prepared = load_prepared(cfg, input);

    double t = cfg.stat.t;
    if (flags.calibrate_t_target) {
        t = saad::calibrate_t(prepared.data.features, cfg.stat.k, *flags.calibrate_t_target,
                              cfg.stat.width_policy);
        saad::log_info("calibrated t=" + std::to_string(t) + " toward target rate " +
                       std::to_string(*flags.calibrate_t_target));
        std::cout << "calibrated t=" << t << '\n';
    }

    const saad::StatModel model =
        saad::select_anomalous_bins(prepared.data.features, t, cfg.stat.width_policy, cfg.stat.k);
    const std::vector<int> labels = saad::label_dataset(prepared.data.features, model);

    saad::save_stat_model(model, cfg.out_dir / "stat_model.json");
    saad::save_labels(prepared.data.row_ids, labels, cfg.out_dir / "stat_labels.csv");

    const auto positives = std::count(labels.begin(), labels.end(), 1);
    std::cout << "fit on " << input.string() << ": " << labels.size() << " rows, "
              << positives << " artificial anomalies (rate "
              << static_cast<double>(positives) / static_cast<double>(labels.size())
              << "), t=" << t << ", k=" << cfg.stat.k << '\n';
    return 0;
}

int cmd_train(const CommonFlags& flags) {
    saad::RunConfig cfg = effective_config(flags);
    require_out_dir(cfg);

    const PreparedData prepared = load_prepared(cfg, cfg.resolve(cfg.train_csv));
    if (!prepared.data.labels)
        throw saad::ValidationError("train: input has no target column; configure "
                                    "columns.target_column");

    const saad::ScalerParams scaler = saad::fit_scaler(prepared.data);
    const saad::Dataset scaled = saad::apply_scaler(prepared.data, scaler);

    saad::NetworkConfig net_cfg = cfg.network;
    net_cfg.seed = saad::derive_seed(cfg.seed, "fcn");
    auto [net, history] = saad::train(scaled, net_cfg);

    saad::ModelBundle bundle{std::move(net), scaler, prepared.data.feature_names,
                             prepared.maps};
    saad::save_model_bundle(bundle, cfg.out_dir / "model.json");
    saad::save_history(history, cfg.out_dir / "history.json");

    std::cout << "trained on " << prepared.data.n_rows() << " rows for "
              << history.epochs.size() << " epochs (best epoch " << history.best_epoch
              << ", val_loss " << history.epochs[history.best_epoch - 1].val_loss << ")"
              << (history.stopped_early ? ", stopped early" : "") << '\n';
    return 0;
}

struct TestViews {
    std::vector<saad::LabeledPair> pairs;
    std::vector<int> truth;
    std::vector<int> stat_labels;
    std::vector<int> dl_labels;
};

TestViews build_test_views(const saad::RunConfig& cfg) {
    const saad::ModelBundle bundle = saad::load_model_bundle(cfg.out_dir / "model.json");
    const PreparedData prepared =
        load_prepared_with_maps(cfg, cfg.resolve(cfg.test_csv), bundle.categorical_maps);
    if (!prepared.data.labels)
        throw saad::ValidationError("evaluation needs ground-truth labels in the test file");

    TestViews views;
    views.truth = prepared.data.int_labels();
    views.stat_labels = saad::load_labels(cfg.out_dir / "stat_labels.csv");
    if (views.stat_labels.size() != views.truth.size())
        throw saad::ValidationError(
            "stat_labels.csv has " + std::to_string(views.stat_labels.size()) +
            " labels but the test set has " + std::to_string(views.truth.size()) +
            " rows; rerun fit-stat with stat.fit_on=test");

    const saad::Dataset scaled = saad::apply_scaler(prepared.data, bundle.scaler);
    views.pairs.reserve(scaled.n_rows());
    views.dl_labels.reserve(scaled.n_rows());
    for (std::size_t i = 0; i < scaled.n_rows(); ++i) {
        const saad::Prediction pred = saad::predict(bundle.net, scaled.features.row(i));
        views.pairs.push_back({views.stat_labels[i], pred.label, pred.confidence});
        views.dl_labels.push_back(pred.label);
    }
    return views;
}

int cmd_sweep(const CommonFlags& flags) {
    saad::RunConfig cfg = effective_config(flags);
    require_out_dir(cfg);

    const TestViews views = build_test_views(cfg);
    const std::vector<double> a_values =
        cfg.a_values.empty() ? saad::default_a_values() : cfg.a_values;
    const std::vector<double> b_values =
        cfg.b_values.empty() ? saad::default_b_values() : cfg.b_values;

    const saad::SweepGrid grid = saad::sweep(views.pairs, views.truth, a_values, b_values);
    saad::write_sweep_accuracy_csv(grid, cfg.out_dir / "sweep_accuracy.csv");
    saad::write_sweep_f1_csv(grid, cfg.out_dir / "sweep_f1.csv");
    saad::write_sweep_long_csv(grid, cfg.out_dir / "sweep_long.csv");
    saad::write_sweep_json(grid, cfg.out_dir / "sweep_full.json");

    double best_acc = -1.0, best_a = 0.0, best_b = 0.0;
    for (std::size_t bi = 0; bi < grid.b_values.size(); ++bi)
        for (std::size_t ai = 0; ai < grid.a_values.size(); ++ai)
            if (grid.accuracy(bi, ai) > best_acc) {
                best_acc = grid.accuracy(bi, ai);
                best_a = grid.a_values[ai];
                best_b = grid.b_values[bi];
            }
    std::cout << "swept " << grid.b_values.size() << "x" << grid.a_values.size()
              << " grid; best accuracy " << best_acc << " at a=" << best_a
              << ", b=" << best_b << '\n';
    return 0;
}

json report_to_json(const saad::MetricsReport& rep, std::optional<double> fbeta,
                    double beta) {
    json j;
    j["accuracy"] = rep.accuracy;
    j["precision"] = rep.precision ? json(*rep.precision) : json(nullptr);
    j["recall"] = rep.recall ? json(*rep.recall) : json(nullptr);
    j["f1"] = rep.f1 ? json(*rep.f1) : json(nullptr);
    if (beta != 1.0)
        j["f_beta"] = fbeta ? json(*fbeta) : json(nullptr);
    j["counts"] = {{"tp", rep.counts.tp},
                   {"fp", rep.counts.fp},
                   {"tn", rep.counts.tn},
                   {"fn", rep.counts.fn}};
    return j;
}

std::string fmt_metric(const std::optional<double>& value) {
    if (!value) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *value);
    return buf;
}

int cmd_eval(const CommonFlags& flags) {
    saad::RunConfig cfg = effective_config(flags);
    require_out_dir(cfg);

    const TestViews views = build_test_views(cfg);
    const std::vector<int> aggregated = saad::aggregate_batch(views.pairs, cfg.aggregation);

    const saad::MetricsReport stat_rep = saad::report(views.stat_labels, views.truth);
    const saad::MetricsReport dl_rep = saad::report(views.dl_labels, views.truth);
    const saad::MetricsReport agg_rep = saad::report(aggregated, views.truth);
    const saad::DisagreementReport decomposition =
        saad::decompose_disagreements(views.pairs, cfg.aggregation);

    const double beta = cfg.f_beta_value;
    json doc;
    doc["format"] = "saad.eval.v1";
    doc["beta"] = beta;
    doc["stat_only"] = report_to_json(stat_rep, saad::f_beta(stat_rep.counts, beta), beta);
    doc["fcn_only"] = report_to_json(dl_rep, saad::f_beta(dl_rep.counts, beta), beta);
    doc["aggregated"] = report_to_json(agg_rep, saad::f_beta(agg_rep.counts, beta), beta);
    doc["aggregated"]["a"] = cfg.aggregation.a;
    doc["aggregated"]["b"] = cfg.aggregation.b;
    doc["aggregated"]["rule_counts"] = decomposition.rule_counts;
    doc["aggregated"]["disagreements"] = {
        {"final_one_from_stat", decomposition.final_one_from_stat()},
        {"final_one_from_fcn", decomposition.final_one_from_fcn()},
        {"final_zero_from_fcn", decomposition.final_zero_from_fcn()}};

    std::ofstream out(cfg.out_dir / "eval.json");
    if (!out) throw saad::IoError("cannot open eval.json for writing");
    out << doc.dump(2) << '\n';

    auto print_section = [&](const char* name, const saad::MetricsReport& rep) {
        std::cout << name << ": accuracy " << fmt_metric(rep.accuracy) << ", precision "
                  << fmt_metric(rep.precision) << ", recall " << fmt_metric(rep.recall)
                  << ", f1 " << fmt_metric(rep.f1) << '\n';
    };
    print_section("stat_only ", stat_rep);
    print_section("fcn_only  ", dl_rep);
    print_section("aggregated", agg_rep);
    std::cout << "aggregation used a=" << cfg.aggregation.a << ", b=" << cfg.aggregation.b
              << '\n';
    return 0;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_ab, bool with_calibrate) {
    cmd->add_option("--config", flags.config_path, "Path to the JSON run config")
        ->required();
    cmd->add_option("--seed", flags.seed, "Override the global seed");
    cmd->add_option("--out", flags.out_dir, "Override the output directory");
    if (with_ab) {
        cmd->add_option("--a", flags.a, "Aggregation threshold a");
        cmd->add_option("--b", flags.b, "Aggregation threshold b");
        cmd->add_option("--beta", flags.beta, "F-beta beta value");
    }
    if (with_calibrate)
        cmd->add_option("--calibrate-t", flags.calibrate_t_target,
                        "Calibrate t toward this artificial anomaly rate");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAAD: statistical + FCN anomaly detection pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    CLI::App* generate = app.add_subcommand("generate", "Generate synthetic maneuver CSVs");
    CLI::App* fit_stat = app.add_subcommand("fit-stat", "Fit and run the artificial labeler");
    CLI::App* train = app.add_subcommand("train", "Train the FCN on the train CSV");
    CLI::App* sweep = app.add_subcommand("sweep", "Evaluate the (a, b) aggregation grid");
    CLI::App* eval = app.add_subcommand("eval", "Report stat/FCN/aggregated metrics");

    add_common_flags(generate, flags, false, false);
    add_common_flags(fit_stat, flags, false, true);
    add_common_flags(train, flags, false, false);
    add_common_flags(sweep, flags, true, false);
    add_common_flags(eval, flags, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (generate->parsed()) return cmd_generate(flags);
        if (fit_stat->parsed()) return cmd_fit_stat(flags);
        if (train->parsed()) return cmd_train(flags);
        if (sweep->parsed()) return cmd_sweep(flags);
        if (eval->parsed()) return cmd_eval(flags);
    } catch (const saad::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const saad::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const saad::ComputeError& e) {
        std::cerr << "computation error: " << e.what() << '\n';
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCompute;
    }
    return 0;
}
