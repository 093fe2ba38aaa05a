#include "saad/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "saad/random.hpp"

namespace saad {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && (std::isspace(static_cast<unsigned char>(s[begin])) != 0)) ++begin;
    while (end > begin && (std::isspace(static_cast<unsigned char>(s[end - 1])) != 0)) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool is_missing_marker(const std::string& cell) {
    return cell.empty() || cell == "NaN" || cell == "nan";
}

double parse_number(const std::string& cell, const std::string& column, std::size_t line_no) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ValidationError("load_csv: non-numeric value '" + cell + "' in column '" +
                              column + "' (line " + std::to_string(line_no) + ")");
    return value;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

void ColumnSpec::validate() const {
    if (selected_features.empty())
        throw ValidationError("ColumnSpec: selected_features must not be empty");
    if (target_column) {
        const auto it = std::find(selected_features.begin(), selected_features.end(), *target_column);
        if (it != selected_features.end())
            throw ValidationError("ColumnSpec: target column '" + *target_column +
                                  "' must not appear in selected_features");
    }
}

std::size_t Dataset::column_index(const std::string& name) const {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end())
        throw ValidationError("Dataset: unknown column '" + name + "'");
    return static_cast<std::size_t>(it - feature_names.begin());
}

std::vector<int> Dataset::int_labels() const {
    if (!labels) throw ValidationError("Dataset: labels are absent");
    std::vector<int> out;
    out.reserve(labels->size());
    for (const double y : *labels) {
        if (y == 0.0)
            out.push_back(0);
        else if (y == 1.0)
            out.push_back(1);
        else
            throw ValidationError("Dataset: label is not 0/1");
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& spec) {
    spec.validate();

    std::ifstream in(path);
    if (!in) throw IoError("load_csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line))
        throw IoError("load_csv: '" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    auto header_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ValidationError("load_csv: column '" + name + "' not found in '" +
                                  path.string() + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(spec.selected_features.size());
    for (const auto& name : spec.selected_features) feature_cols.push_back(header_index(name));

    std::optional<std::size_t> target_col;
    if (spec.target_column) target_col = header_index(*spec.target_column);

    const std::set<std::string> categorical(spec.categorical_columns.begin(),
                                            spec.categorical_columns.end());
    for (const auto& name : spec.categorical_columns) header_index(name);

    Dataset ds;
    ds.feature_names = spec.selected_features;
    if (target_col) ds.labels.emplace();
    for (const auto& name : spec.selected_features)
        if (categorical.contains(name)) ds.text_cells[name] = {};

    const std::string file_tag = path.filename().string();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ValidationError("load_csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));

        std::vector<double> row(feature_cols.size());
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            const std::string& name = spec.selected_features[j];
            const std::string& cell = cells[feature_cols[j]];
            if (categorical.contains(name)) {
                // Raw string kept until encode_categoricals; missing markers
                // are normalized to the empty string.
                ds.text_cells[name].push_back(is_missing_marker(cell) ? std::string{} : cell);
                row[j] = kNaN;
            } else if (is_missing_marker(cell)) {
                row[j] = kNaN;
            } else {
                row[j] = parse_number(cell, name, line_no);
            }
        }
        if (target_col) {
            const std::string& cell = cells[*target_col];
            if (is_missing_marker(cell)) {
                ds.labels->push_back(kNaN);
            } else {
                const double y = parse_number(cell, *spec.target_column, line_no);
                if (y != 0.0 && y != 1.0)
                    throw ValidationError("load_csv: target value '" + cell + "' on line " +
                                          std::to_string(line_no) + " is not 0 or 1");
                ds.labels->push_back(y);
            }
        }
        ds.row_ids.push_back(file_tag + ":" + std::to_string(line_no - 1));
        rows.push_back(std::move(row));
    }

    if (rows.empty())
        throw ValidationError("load_csv: '" + path.string() + "' has no data rows");

    ds.features = Matrix::from_rows(rows);
    return ds;
}

Dataset clean_rows(const Dataset& ds) {
    const std::size_t m = ds.n_rows();
    const std::size_t n = ds.n_cols();

    std::vector<const std::vector<std::string>*> text_by_col(n, nullptr);
    for (std::size_t j = 0; j < n; ++j) {
        const auto it = ds.text_cells.find(ds.feature_names[j]);
        if (it != ds.text_cells.end()) text_by_col[j] = &it->second;
    }

    std::vector<std::size_t> keep;
    keep.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            if (text_by_col[j] != nullptr)
                ok = !(*text_by_col[j])[i].empty();
            else
                ok = std::isfinite(ds.features(i, j));
        }
        if (ok && ds.labels) ok = std::isfinite((*ds.labels)[i]);
        if (ok) keep.push_back(i);
    }

    if (keep.empty()) throw ComputeError("clean_rows: every row was dropped");

    Dataset out;
    out.feature_names = ds.feature_names;
    out.features = Matrix(keep.size(), n);
    if (ds.labels) out.labels.emplace();
    for (const auto& [name, column] : ds.text_cells) out.text_cells[name] = {};

    for (std::size_t r = 0; r < keep.size(); ++r) {
        const std::size_t i = keep[r];
        for (std::size_t j = 0; j < n; ++j) out.features(r, j) = ds.features(i, j);
        if (ds.labels) out.labels->push_back((*ds.labels)[i]);
        if (!ds.row_ids.empty()) out.row_ids.push_back(ds.row_ids[i]);
        for (const auto& [name, column] : ds.text_cells)
            out.text_cells[name].push_back(column[i]);
    }
    return out;
}

namespace {

Dataset encode_with(const Dataset& ds, const ColumnSpec& spec, const CategoricalMaps& maps,
                    bool allow_unseen_growth, CategoricalMaps* grown) {
    for (const auto& name : spec.categorical_columns)
        if (!ds.text_cells.contains(name) &&
            std::find(ds.feature_names.begin(), ds.feature_names.end(), name) ==
                ds.feature_names.end())
            throw ValidationError("encode_categoricals: column '" + name + "' does not exist");

    Dataset out = ds;
    CategoricalMaps working = maps;
    for (const auto& [name, column] : ds.text_cells) {
        const std::size_t j = ds.column_index(name);
        CategoryMap& map = working[name];
        for (std::size_t i = 0; i < column.size(); ++i) {
            const std::string& value = column[i];
            if (value.empty()) continue; // missing; left NaN for clean_rows
            auto code = map.code_of(value);
            if (!code) {
                if (!allow_unseen_growth)
                    throw ValidationError("encode_categoricals: unseen category '" + value +
                                          "' in column '" + name + "'");
                map.categories.push_back(value);
                code = static_cast<int>(map.categories.size() - 1);
            }
            out.features(i, j) = static_cast<double>(*code);
        }
    }
    out.text_cells.clear();
    if (grown != nullptr) *grown = std::move(working);
    return out;
}

} // namespace

EncodeResult encode_categoricals(const Dataset& ds, const ColumnSpec& spec) {
    EncodeResult result;
    result.data = encode_with(ds, spec, {}, true, &result.maps);
    return result;
}

Dataset apply_categorical_maps(const Dataset& ds, const ColumnSpec& spec,
                               const CategoricalMaps& maps) {
    return encode_with(ds, spec, maps, false, nullptr);
}

ScalerParams fit_scaler(const Dataset& ds) {
    const std::size_t m = ds.n_rows();
    const std::size_t n = ds.n_cols();
    if (m < 2) throw ValidationError("fit_scaler: need at least 2 rows");

    ScalerParams params;
    params.means.resize(n);
    params.stddevs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += ds.features(i, j);
        const double mean = sum / static_cast<double>(m);
        double sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = ds.features(i, j) - mean;
            sq += d * d;
        }
        params.means[j] = mean;
        params.stddevs[j] = std::sqrt(sq / static_cast<double>(m));
    }
    return params;
}

Dataset apply_scaler(const Dataset& ds, const ScalerParams& params) {
    if (params.size() != ds.n_cols())
        throw ValidationError("apply_scaler: scaler was fitted on " +
                              std::to_string(params.size()) + " columns, dataset has " +
                              std::to_string(ds.n_cols()));

    Dataset out = ds;
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
        if (params.is_constant(j)) {
            for (std::size_t i = 0; i < ds.n_rows(); ++i) out.features(i, j) = 0.0;
        } else {
            for (std::size_t i = 0; i < ds.n_rows(); ++i)
                out.features(i, j) = (ds.features(i, j) - params.means[j]) / params.stddevs[j];
        }
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split: train_fraction must lie in (0, 1)");
    const std::size_t m = ds.n_rows();
    if (m < 2) throw ValidationError("split: need at least 2 rows");

    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const auto train_size = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(m)));

    auto take = [&](std::size_t begin, std::size_t end) {
        Dataset part;
        part.feature_names = ds.feature_names;
        part.features = Matrix(end - begin, ds.n_cols());
        if (ds.labels) part.labels.emplace();
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t i = order[r];
            for (std::size_t j = 0; j < ds.n_cols(); ++j)
                part.features(r - begin, j) = ds.features(i, j);
            if (ds.labels) part.labels->push_back((*ds.labels)[i]);
            if (!ds.row_ids.empty()) part.row_ids.push_back(ds.row_ids[i]);
        }
        return part;
    };

    return {take(0, train_size), take(train_size, m)};
}

} // namespace saad
