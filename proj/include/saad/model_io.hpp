#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "saad/dataset.hpp"
#include "saad/fcn.hpp"
#include "saad/stat_labeler.hpp"

namespace saad {

/// Everything needed to run the trained classifier on new data.
struct ModelBundle {
    Network net;
    ScalerParams scaler;
    std::vector<std::string> feature_names;
    CategoricalMaps categorical_maps;
};

// All files are JSON. Doubles survive a save/load round trip bit-exactly.

void save_stat_model(const StatModel& model, const std::filesystem::path& path);
StatModel load_stat_model(const std::filesystem::path& path);

void save_model_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model_bundle(const std::filesystem::path& path);

void save_history(const TrainHistory& history, const std::filesystem::path& path);

/// Label file: one row id and one 0/1 label per data row, CSV.
void save_labels(const std::vector<std::string>& row_ids, const std::vector<int>& labels,
                 const std::filesystem::path& path);
std::vector<int> load_labels(const std::filesystem::path& path);

} // namespace saad
