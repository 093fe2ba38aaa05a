#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saad/matrix.hpp"

namespace saad {

/// Which columns of a CSV to load and how to treat them.
struct ColumnSpec {
    std::vector<std::string> selected_features;
    std::optional<std::string> target_column;
    std::vector<std::string> categorical_columns;

    void validate() const;
};

/// Per-column standardization parameters. A stddev of exactly 0 marks a
/// constant feature; apply_scaler maps such columns to 0 instead of dividing.
struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stddevs;

    std::size_t size() const { return means.size(); }
    bool is_constant(std::size_t column) const { return stddevs[column] == 0.0; }
};

/// Encoding of one categorical column; a category's code is its position.
struct CategoryMap {
    std::vector<std::string> categories;

    std::optional<int> code_of(const std::string& value) const {
        for (std::size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == value) return static_cast<int>(i);
        return std::nullopt;
    }
};

using CategoricalMaps = std::map<std::string, CategoryMap>;

/**
 * Tabular sensor data: m instances by n features.
 *
 * Labels are 0/1 doubles; NaN marks a missing label until clean_rows runs.
 * Categorical columns loaded from CSV keep their raw strings in text_cells
 * (with a NaN placeholder in the matrix) until encode_categoricals replaces
 * them with integer codes.
 */
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix features;
    std::optional<std::vector<double>> labels;
    std::vector<std::string> row_ids;
    std::map<std::string, std::vector<std::string>> text_cells;

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_cols() const { return features.cols(); }

    std::size_t column_index(const std::string& name) const;

    /// Labels as 0/1 ints. Throws if labels are absent or not binary.
    std::vector<int> int_labels() const;
};

/**
 * Loads a CSV file (UTF-8, comma separated, header row, '.' decimals).
 * Empty cells, "NaN" and "nan" are treated as missing. Columns are returned
 * in spec order; the target column, when named, is parsed into labels.
 */
Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& spec);

/// Drops every row containing a missing/undefined/non-finite value,
/// preserving the order of survivors. Throws ComputeError if nothing is left.
Dataset clean_rows(const Dataset& ds);

struct EncodeResult {
    Dataset data;
    CategoricalMaps maps;
};

/// Replaces categorical columns with 0-based integer codes assigned in
/// first-appearance order, returning the mapping for inference reuse.
EncodeResult encode_categoricals(const Dataset& ds, const ColumnSpec& spec);

/// Applies a previously fitted mapping. A category that was never seen at
/// fit time raises ValidationError.
Dataset apply_categorical_maps(const Dataset& ds, const ColumnSpec& spec,
                               const CategoricalMaps& maps);

/// Per-column mean and population standard deviation (divisor m). Needs m >= 2.
ScalerParams fit_scaler(const Dataset& ds);

/// x -> (x - mean) / stddev; constant columns map to 0.
Dataset apply_scaler(const Dataset& ds, const ScalerParams& params);

/// Seeded shuffle split. Train part holds floor(train_fraction * m) rows;
/// the parts are disjoint and exhaustive.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

} // namespace saad
