#include "saad/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace saad {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!known.contains(key))
            throw ValidationError("config: unknown key '" + key + "' in " + where);
}

ManeuverConfig parse_maneuver(const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"n_maneuvers", "samples_per_maneuver", "speed_range",
                         "brake_pressure_range", "n_features", "anomaly_rate"},
                        where);
    ManeuverConfig cfg;
    cfg.n_maneuvers = j.value("n_maneuvers", cfg.n_maneuvers);
    cfg.samples_per_maneuver = j.value("samples_per_maneuver", cfg.samples_per_maneuver);
    if (j.contains("speed_range")) {
        const auto range = j.at("speed_range").get<std::vector<double>>();
        if (range.size() != 2) throw ValidationError("config: speed_range needs two values");
        cfg.speed_min = range[0];
        cfg.speed_max = range[1];
    }
    if (j.contains("brake_pressure_range")) {
        const auto range = j.at("brake_pressure_range").get<std::vector<double>>();
        if (range.size() != 2)
            throw ValidationError("config: brake_pressure_range needs two values");
        cfg.brake_min = range[0];
        cfg.brake_max = range[1];
    }
    cfg.n_features = j.value("n_features", cfg.n_features);
    cfg.anomaly_rate = j.value("anomaly_rate", cfg.anomaly_rate);
    return cfg;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }

    reject_unknown_keys(doc,
                        {"seed", "out_dir", "columns", "stat", "network", "aggregation",
                         "synth", "paths"},
                        "top level");

    RunConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir.string());

    if (doc.contains("columns")) {
        const json& c = doc.at("columns");
        reject_unknown_keys(c, {"selected_features", "target_column", "categorical_columns"},
                            "columns");
        cfg.columns.selected_features =
            c.value("selected_features", std::vector<std::string>{});
        if (c.contains("target_column") && !c.at("target_column").is_null())
            cfg.columns.target_column = c.at("target_column").get<std::string>();
        cfg.columns.categorical_columns =
            c.value("categorical_columns", std::vector<std::string>{});
    } else {
        cfg.columns.target_column = "anomaly";
    }

    if (doc.contains("stat")) {
        const json& s = doc.at("stat");
        reject_unknown_keys(s, {"t", "k", "width_policy", "fixed_width", "fit_on"}, "stat");
        cfg.stat.t = s.value("t", cfg.stat.t);
        cfg.stat.k = s.value("k", cfg.stat.k);
        const std::string policy = s.value("width_policy", "auto");
        if (policy == "auto") {
            cfg.stat.width_policy = WidthPolicy::fd();
        } else if (policy == "fixed") {
            if (!s.contains("fixed_width"))
                throw ValidationError("config: width_policy 'fixed' needs fixed_width");
            cfg.stat.width_policy = WidthPolicy::fixed_width(s.at("fixed_width").get<double>());
        } else {
            throw ValidationError("config: width_policy must be 'auto' or 'fixed'");
        }
        cfg.stat.fit_on = s.value("fit_on", cfg.stat.fit_on);
        if (cfg.stat.fit_on != "train" && cfg.stat.fit_on != "test")
            throw ValidationError("config: stat.fit_on must be 'train' or 'test'");
    }

    if (doc.contains("network")) {
        const json& n = doc.at("network");
        reject_unknown_keys(n,
                            {"hidden_sizes", "dropout_rates", "l2_lambda", "learning_rate",
                             "adam_beta1", "adam_beta2", "adam_epsilon", "max_epochs",
                             "patience", "batch_size", "validation_fraction"},
                            "network");
        cfg.network.hidden_sizes = n.value("hidden_sizes", cfg.network.hidden_sizes);
        cfg.network.dropout_rates = n.value("dropout_rates", cfg.network.dropout_rates);
        cfg.network.l2_lambda = n.value("l2_lambda", cfg.network.l2_lambda);
        cfg.network.learning_rate = n.value("learning_rate", cfg.network.learning_rate);
        cfg.network.adam_beta1 = n.value("adam_beta1", cfg.network.adam_beta1);
        cfg.network.adam_beta2 = n.value("adam_beta2", cfg.network.adam_beta2);
        cfg.network.adam_epsilon = n.value("adam_epsilon", cfg.network.adam_epsilon);
        cfg.network.max_epochs = n.value("max_epochs", cfg.network.max_epochs);
        cfg.network.patience = n.value("patience", cfg.network.patience);
        cfg.network.batch_size = n.value("batch_size", cfg.network.batch_size);
        cfg.network.validation_fraction =
            n.value("validation_fraction", cfg.network.validation_fraction);
    }

    if (doc.contains("aggregation")) {
        const json& a = doc.at("aggregation");
        reject_unknown_keys(a, {"a", "b", "beta", "a_values", "b_values"}, "aggregation");
        cfg.aggregation.a = a.value("a", cfg.aggregation.a);
        cfg.aggregation.b = a.value("b", cfg.aggregation.b);
        cfg.f_beta_value = a.value("beta", cfg.f_beta_value);
        cfg.a_values = a.value("a_values", std::vector<double>{});
        cfg.b_values = a.value("b_values", std::vector<double>{});
    }

    if (doc.contains("synth")) {
        const json& s = doc.at("synth");
        reject_unknown_keys(s, {"train", "test", "anomaly"}, "synth");
        if (s.contains("train")) cfg.synth_train = parse_maneuver(s.at("train"), "synth.train");
        if (s.contains("test")) cfg.synth_test = parse_maneuver(s.at("test"), "synth.test");
        if (s.contains("anomaly")) {
            const json& a = s.at("anomaly");
            reject_unknown_keys(a, {"affected_feature_count", "magnitude_sigmas", "mode"},
                                "synth.anomaly");
            cfg.anomaly.affected_feature_count =
                a.value("affected_feature_count", cfg.anomaly.affected_feature_count);
            cfg.anomaly.magnitude_sigmas = a.value("magnitude_sigmas", cfg.anomaly.magnitude_sigmas);
            const std::string mode = a.value("mode", "spike");
            if (mode == "spike")
                cfg.anomaly.mode = AnomalySpec::Mode::spike;
            else if (mode == "drift")
                cfg.anomaly.mode = AnomalySpec::Mode::drift;
            else if (mode == "stuck")
                cfg.anomaly.mode = AnomalySpec::Mode::stuck;
            else
                throw ValidationError("config: anomaly mode must be spike, drift or stuck");
        }
    }

    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        reject_unknown_keys(p, {"train_csv", "test_csv"}, "paths");
        cfg.train_csv = p.value("train_csv", cfg.train_csv);
        cfg.test_csv = p.value("test_csv", cfg.test_csv);
    }

    return cfg;
}

} // namespace saad
