#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "saad/dataset.hpp"
#include "saad/matrix.hpp"

namespace saad {

/// Envelope for the simulated under-brake maneuvers.
struct ManeuverConfig {
    int n_maneuvers = 25;
    int samples_per_maneuver = 200;
    double speed_min = 0.0;    // km/h, envelope [0, 150]
    double speed_max = 150.0;
    double brake_min = 5.0;    // percent, envelope [5, 100]
    double brake_max = 100.0;
    int n_features = 18;
    double anomaly_rate = 0.3; // in (0, 1)
    std::uint64_t seed = 0;

    void validate() const;
};

/// Shape of the injected anomalies.
struct AnomalySpec {
    int affected_feature_count = 4;
    double magnitude_sigmas = 4.0;
    enum class Mode { spike, drift, stuck };
    Mode mode = Mode::spike;

    void validate(int n_features) const;
};

/// generate() plus the unperturbed counterfactual matrix, for diagnostics.
struct SynthResult {
    Dataset data;
    Matrix counterfactual;
};

/**
 * Deterministic HIL-style maneuver data with injected anomalies.
 *
 * Channels are smooth and correlated (speed profile, brake pressure, wheel
 * speeds, temperatures, ...) with bounded noise. Exactly
 * round(anomaly_rate * rows) rows are perturbed in exactly
 * affected_feature_count features each and labeled 1.
 */
Dataset generate(const ManeuverConfig& cfg, const AnomalySpec& spec);

/// Like generate() but also returns the matrix before perturbation.
SynthResult generate_detailed(const ManeuverConfig& cfg, const AnomalySpec& spec);

/// Feature names used by the generator for a given width.
std::vector<std::string> synth_feature_names(int n_features);

/**
 * Writes the CSV dialect load_csv reads: header row, comma separated,
 * numbers with 17 significant digits (bit-exact round trip). Labels, when
 * present, become a trailing 0/1 column.
 */
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& target_name = "anomaly");

} // namespace saad
