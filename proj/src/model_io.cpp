#include "saad/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace saad {

using nlohmann::json;

namespace {

json open_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("failed to parse '" + path.string() + "': " + e.what());
    }
    return doc;
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

json width_policy_to_json(const WidthPolicy& policy) {
    if (policy.kind == WidthPolicy::Kind::fixed)
        return {{"kind", "fixed"}, {"width", policy.width}};
    return {{"kind", "auto"}};
}

WidthPolicy width_policy_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fixed") return WidthPolicy::fixed_width(j.at("width").get<double>());
    if (kind == "auto") return WidthPolicy::fd();
    throw ValidationError("unknown width policy kind '" + kind + "'");
}

} // namespace

void save_stat_model(const StatModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "saad.stat_model.v1";
    doc["t"] = model.t;
    doc["k"] = model.k;
    doc["width_policy"] = width_policy_to_json(model.width_policy);

    json features = json::array();
    for (std::size_t j = 0; j < model.n_features(); ++j) {
        const FeatureBins& fb = model.per_feature_bins[j];
        json f;
        f["feature_index"] = fb.feature_index;
        f["domain_min"] = fb.domain_min;
        f["domain_max"] = fb.domain_max;
        f["total_count"] = fb.total_count;
        json edges = json::array();
        json counts = json::array();
        json rel_freqs = json::array();
        for (std::size_t i = 0; i < fb.bins.size(); ++i) {
            edges.push_back(fb.bins[i].lower);
            counts.push_back(fb.bins[i].count);
            rel_freqs.push_back(fb.bins[i].rel_freq);
        }
        if (!fb.bins.empty()) edges.push_back(fb.bins.back().upper);
        f["edges"] = std::move(edges);
        f["counts"] = std::move(counts);
        f["rel_freqs"] = std::move(rel_freqs);
        f["anomalous"] = model.per_feature_anomalous[j];
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    write_json(doc, path);
}

StatModel load_stat_model(const std::filesystem::path& path) {
    const json doc = open_json(path);
    if (doc.value("format", "") != "saad.stat_model.v1")
        throw ValidationError("'" + path.string() + "' is not a stat model file");

    StatModel model;
    model.t = doc.at("t").get<double>();
    model.k = doc.at("k").get<int>();
    model.width_policy = width_policy_from_json(doc.at("width_policy"));

    for (const json& f : doc.at("features")) {
        FeatureBins fb;
        fb.feature_index = f.at("feature_index").get<std::size_t>();
        fb.domain_min = f.at("domain_min").get<double>();
        fb.domain_max = f.at("domain_max").get<double>();
        fb.total_count = f.at("total_count").get<std::size_t>();
        const auto edges = f.at("edges").get<std::vector<double>>();
        const auto counts = f.at("counts").get<std::vector<std::size_t>>();
        const auto rel_freqs = f.at("rel_freqs").get<std::vector<double>>();
        if ((counts.empty() ? !edges.empty() : edges.size() != counts.size() + 1) ||
            counts.size() != rel_freqs.size())
            throw ValidationError("stat model '" + path.string() + "': inconsistent bin arrays");
        for (std::size_t i = 0; i < counts.size(); ++i)
            fb.bins.push_back({edges[i], edges[i + 1], counts[i], rel_freqs[i]});
        model.per_feature_bins.push_back(std::move(fb));
        model.per_feature_anomalous.push_back(f.at("anomalous").get<std::vector<std::size_t>>());
    }
    return model;
}

namespace {

json network_config_to_json(const NetworkConfig& cfg) {
    return {{"hidden_sizes", cfg.hidden_sizes},
            {"dropout_rates", cfg.dropout_rates},
            {"l2_lambda", cfg.l2_lambda},
            {"learning_rate", cfg.learning_rate},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"adam_epsilon", cfg.adam_epsilon},
            {"max_epochs", cfg.max_epochs},
            {"patience", cfg.patience},
            {"batch_size", cfg.batch_size},
            {"validation_fraction", cfg.validation_fraction},
            {"seed", cfg.seed}};
}

NetworkConfig network_config_from_json(const json& j) {
    NetworkConfig cfg;
    cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    cfg.dropout_rates = j.at("dropout_rates").get<std::vector<double>>();
    cfg.l2_lambda = j.at("l2_lambda").get<double>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.adam_beta1 = j.at("adam_beta1").get<double>();
    cfg.adam_beta2 = j.at("adam_beta2").get<double>();
    cfg.adam_epsilon = j.at("adam_epsilon").get<double>();
    cfg.max_epochs = j.at("max_epochs").get<std::size_t>();
    cfg.patience = j.at("patience").get<std::size_t>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.validation_fraction = j.at("validation_fraction").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

} // namespace

void save_model_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "saad.model.v1";
    doc["input_dim"] = bundle.net.input_dim;
    doc["feature_names"] = bundle.feature_names;
    doc["config"] = network_config_to_json(bundle.net.config);
    doc["scaler"] = {{"means", bundle.scaler.means}, {"stddevs", bundle.scaler.stddevs}};

    json maps = json::object();
    for (const auto& [name, map] : bundle.categorical_maps) maps[name] = map.categories;
    doc["categorical_maps"] = std::move(maps);

    json layers = json::array();
    for (std::size_t l = 0; l < bundle.net.layer_count(); ++l) {
        const Matrix& w = bundle.net.weights[l];
        layers.push_back({{"fan_in", w.rows()},
                          {"fan_out", w.cols()},
                          {"weights", w.storage()},
                          {"biases", bundle.net.biases[l]}});
    }
    doc["layers"] = std::move(layers);
    write_json(doc, path);
}

ModelBundle load_model_bundle(const std::filesystem::path& path) {
    const json doc = open_json(path);
    if (doc.value("format", "") != "saad.model.v1")
        throw ValidationError("'" + path.string() + "' is not a model bundle");

    ModelBundle bundle;
    bundle.net.input_dim = doc.at("input_dim").get<std::size_t>();
    bundle.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    bundle.net.config = network_config_from_json(doc.at("config"));
    bundle.scaler.means = doc.at("scaler").at("means").get<std::vector<double>>();
    bundle.scaler.stddevs = doc.at("scaler").at("stddevs").get<std::vector<double>>();

    for (const auto& [name, categories] : doc.at("categorical_maps").items())
        bundle.categorical_maps[name] = CategoryMap{categories.get<std::vector<std::string>>()};

    for (const json& layer : doc.at("layers")) {
        const auto fan_in = layer.at("fan_in").get<std::size_t>();
        const auto fan_out = layer.at("fan_out").get<std::size_t>();
        const auto values = layer.at("weights").get<std::vector<double>>();
        if (values.size() != fan_in * fan_out)
            throw ValidationError("model bundle '" + path.string() + "': bad layer shape");
        Matrix w(fan_in, fan_out);
        w.storage() = values;
        bundle.net.weights.push_back(std::move(w));
        bundle.net.biases.push_back(layer.at("biases").get<std::vector<double>>());
    }
    return bundle;
}

void save_history(const TrainHistory& history, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "saad.history.v1";
    doc["best_epoch"] = history.best_epoch;
    doc["stopped_early"] = history.stopped_early;
    json epochs = json::array();
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        epochs.push_back({{"epoch", e + 1},
                          {"train_loss", history.epochs[e].train_loss},
                          {"val_loss", history.epochs[e].val_loss},
                          {"val_accuracy", history.epochs[e].val_accuracy}});
    }
    doc["epochs"] = std::move(epochs);
    write_json(doc, path);
}

void save_labels(const std::vector<std::string>& row_ids, const std::vector<int>& labels,
                 const std::filesystem::path& path) {
    if (!row_ids.empty() && row_ids.size() != labels.size())
        throw ValidationError("save_labels: row ids and labels differ in length");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "row_id,stat_label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << (row_ids.empty() ? std::to_string(i) : row_ids[i]) << ',' << labels[i] << '\n';
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("label file '" + path.string() + "' is empty");
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw ValidationError("label file '" + path.string() + "': malformed line");
        const std::string cell = line.substr(comma + 1);
        if (cell == "0")
            labels.push_back(0);
        else if (cell == "1")
            labels.push_back(1);
        else
            throw ValidationError("label file '" + path.string() + "': label is not 0/1");
    }
    return labels;
}

} // namespace saad
