#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "saad/matrix.hpp"
#include "saad/metrics.hpp"

namespace saad {

/**
 * Confidence gates for the two disagreement cases: `a` gates an
 * FCN-says-anomaly call (accepted when v > a), `b` gates an FCN-says-normal
 * call (overridden by the statistical label when v < b). Values outside the
 * conventional bands [0.5, 1] / [0, 0.5] are accepted with a warning.
 */
struct AggregationParams {
    double a = 0.97;
    double b = 0.5;
};

/// The two model votes for one instance plus the FCN confidence v.
struct LabeledPair {
    int stat_label = 0;
    int dl_label = 0;
    double confidence = 0.0;
};

/// Accuracy/F1 over the (a, b) grid; matrices are |b_values| x |a_values|.
/// Undefined F1 cells are stored as NaN.
struct SweepGrid {
    std::vector<double> a_values;
    std::vector<double> b_values;
    Matrix accuracy;
    Matrix f1;
};

/**
 * Firing counts for the six aggregation rules, in table order:
 *   0: (0,0) -> 0        1: (1,1) -> 1
 *   2: (0,1), v > a -> 1  3: (0,1), v <= a -> 0
 *   4: (1,0), v < b -> 1  5: (1,0), v >= b -> 0
 *
 * For disagreement cases the final label is also attributed to a source
 * model. A final 1 is credited to whichever model asserted the anomaly that
 * prevailed (rule 2: FCN, rule 4: statistical labeler). A final 0 is
 * credited to the FCN either way: in rule 3 its own confidence fell short
 * of the gate, in rule 5 its normal call stood.
 */
struct DisagreementReport {
    std::array<std::size_t, 6> rule_counts{};

    std::size_t disagreements() const {
        return rule_counts[2] + rule_counts[3] + rule_counts[4] + rule_counts[5];
    }
    std::size_t total() const { return rule_counts[0] + rule_counts[1] + disagreements(); }

    std::size_t final_one_from_fcn() const { return rule_counts[2]; }
    std::size_t final_one_from_stat() const { return rule_counts[4]; }
    std::size_t final_zero_from_fcn() const { return rule_counts[3] + rule_counts[5]; }
};

/// Applies the six decision rules to one pair.
int aggregate(const LabeledPair& pair, const AggregationParams& params);

/// Element-wise aggregate, order preserving. Warns once on out-of-band params.
std::vector<int> aggregate_batch(std::span<const LabeledPair> pairs,
                                 const AggregationParams& params);

/// Evaluates accuracy and F1 of the aggregated labels against truth for
/// every (b_i, a_j) combination.
SweepGrid sweep(std::span<const LabeledPair> pairs, std::span<const int> truth,
                std::vector<double> a_values, std::vector<double> b_values);

DisagreementReport decompose_disagreements(std::span<const LabeledPair> pairs,
                                           const AggregationParams& params);

/// The default sweep axes: 18 a-values (0.51..0.55, 0.60..0.95, 0.96..1.00)
/// and 19 b-values (0.00..0.05, 0.10..0.45, 0.46..0.50).
std::vector<double> default_a_values();
std::vector<double> default_b_values();

/// Table-layout CSV: first row the a axis, first column the b axis,
/// accuracy cells as percentages with one decimal.
void write_sweep_accuracy_csv(const SweepGrid& grid, const std::filesystem::path& path);

/// Same layout with F1 cells to two decimals.
void write_sweep_f1_csv(const SweepGrid& grid, const std::filesystem::path& path);

/// Long-format CSV (b, a, accuracy, f1) at full precision, for heatmaps.
void write_sweep_long_csv(const SweepGrid& grid, const std::filesystem::path& path);

/// Machine-readable JSON with full-precision values (undefined cells null).
void write_sweep_json(const SweepGrid& grid, const std::filesystem::path& path);

} // namespace saad
