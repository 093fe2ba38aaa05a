#include "saad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "saad/random.hpp"

namespace saad {

namespace {

// Channels tied to the speed/pressure profiles. Relational anomalies
// perturb these multiplicatively, which breaks the coupling while staying
// inside the channel's own histogram range.
const std::set<std::size_t> kRatioChannels = {2, 3, 4, 5, 8, 9};

// The speed readout group moved together by regime anomalies: vehicle speed
// plus the four wheel speeds.
const std::size_t kSpeedGroup[] = {0, 2, 3, 4, 5};

// Physical envelope of the recorded signals, independent of the per-split
// maneuver ranges.
constexpr double kSpeedEnvelopeMin = 0.0;
constexpr double kSpeedEnvelopeMax = 150.0;
constexpr double kBrakeEnvelopeMin = 5.0;
constexpr double kBrakeEnvelopeMax = 100.0;

struct ManeuverState {
    double speed = 0.0;
    double prev_speed = 0.0;
    double temp_base_front = 0.0;
    double temp_base_rear = 0.0;
    double load_ema = 0.0; // slow thermal load average
    double ambient = 20.0;
    double peak_pressure = 0.0;
    // Step-commanded activation windows, as [start, end) phase pairs.
    std::vector<std::pair<double, double>> pulses;

    bool braking_at(double phase) const {
        for (const auto& [start, end] : pulses)
            if (phase >= start && phase < end) return true;
        return false;
    }
};

} // namespace

void ManeuverConfig::validate() const {
    if (n_maneuvers < 1 || samples_per_maneuver < 1)
        throw ValidationError("ManeuverConfig: maneuver and sample counts must be positive");
    if (!(speed_min >= 0.0 && speed_min < speed_max && speed_max <= 150.0))
        throw ValidationError("ManeuverConfig: speed range must satisfy 0 <= min < max <= 150");
    if (!(brake_min >= 5.0 && brake_min < brake_max && brake_max <= 100.0))
        throw ValidationError("ManeuverConfig: brake range must satisfy 5 <= min < max <= 100");
    if (n_features < 2) throw ValidationError("ManeuverConfig: need at least 2 features");
    if (!(anomaly_rate > 0.0 && anomaly_rate < 1.0))
        throw ValidationError("ManeuverConfig: anomaly_rate must lie in (0, 1)");
}

void AnomalySpec::validate(int n_features) const {
    if (affected_feature_count < 1)
        throw ValidationError("AnomalySpec: affected_feature_count must be at least 1");
    if (affected_feature_count > n_features)
        throw ValidationError("AnomalySpec: affected_feature_count exceeds n_features");
    if (!(magnitude_sigmas > 0.0))
        throw ValidationError("AnomalySpec: magnitude_sigmas must be positive");
}

std::vector<std::string> synth_feature_names(int n_features) {
    static const std::vector<std::string> base = {
        "vehicle_speed",   "brake_pressure",     "wheel_speed_fl", "wheel_speed_fr",
        "wheel_speed_rl",  "wheel_speed_rr",     "brake_temp_front", "brake_temp_rear",
        "hydraulic_pressure", "pedal_force",     "longitudinal_accel", "yaw_rate",
        "steering_angle",  "abs_duty_cycle",     "engine_rpm",     "throttle_position",
        "battery_voltage", "ambient_temp"};
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n_features));
    for (int j = 0; j < n_features; ++j) {
        if (static_cast<std::size_t>(j) < base.size())
            names.push_back(base[static_cast<std::size_t>(j)]);
        else
            names.push_back("aux_" + std::to_string(j));
    }
    return names;
}

namespace {

Matrix generate_clean(const ManeuverConfig& cfg, std::vector<std::string>& row_ids, Rng& rng) {
    const auto n = static_cast<std::size_t>(cfg.n_features);
    const auto samples = static_cast<std::size_t>(cfg.samples_per_maneuver);
    const std::size_t m = static_cast<std::size_t>(cfg.n_maneuvers) * samples;
    Matrix features(m, n);
    row_ids.reserve(m);

    const double dt = 0.05; // seconds between samples
    const double speed_span = cfg.speed_max - cfg.speed_min;

    std::size_t row = 0;
    for (int mi = 0; mi < cfg.n_maneuvers; ++mi) {
        ManeuverState st;
        st.speed = rng.uniform(cfg.speed_min + 0.06 * speed_span, cfg.speed_max);
        st.prev_speed = st.speed;
        st.ambient = rng.uniform(8.0, 32.0);
        st.temp_base_front = rng.uniform(5.0, 45.0);
        st.temp_base_rear = rng.uniform(3.0, 30.0);
        st.load_ema = rng.uniform(0.0, 0.5); // braking history before the window

        // Step-commanded pressure at one of the standard test levels, applied
        // in several activation windows per run.
        const double levels[] = {30.0, 60.0, 90.0};
        st.peak_pressure = std::clamp(levels[rng.uniform_index(3)] + rng.uniform(-2.0, 2.0),
                                      cfg.brake_min, cfg.brake_max);
        const int n_pulses = 2 + static_cast<int>(rng.uniform_index(3));
        double cursor = rng.uniform(0.02, 0.10);
        for (int p = 0; p < n_pulses && cursor < 0.9; ++p) {
            const double len = rng.uniform(0.10, 0.22);
            st.pulses.emplace_back(cursor, std::min(cursor + len, 0.98));
            cursor += len + rng.uniform(0.06, 0.20);
        }

        for (std::size_t si = 0; si < samples; ++si) {
            const double phase =
                samples > 1 ? static_cast<double>(si) / static_cast<double>(samples - 1) : 0.0;

            const bool braking = st.braking_at(phase);
            double pressure = braking ? st.peak_pressure : cfg.brake_min;
            pressure += rng.uniform(-0.8, 0.8);
            pressure = std::clamp(pressure, cfg.brake_min, cfg.brake_max);

            // Engine braking keeps the profile sweeping between activations.
            const double decel_ms2 =
                (braking ? 5.0 * pressure / 100.0 : 0.8) * rng.uniform(0.85, 1.0);
            st.prev_speed = st.speed;
            st.speed = std::clamp(st.speed - decel_ms2 * 3.6 * dt, cfg.speed_min, cfg.speed_max);

            const double slip = braking ? 0.015 * pressure / 100.0 : 0.0;
            // Brake temperatures follow a lagged load average, not the
            // instantaneous operating point.
            st.load_ema += 0.08 * (pressure / 100.0 * st.speed / 150.0 - st.load_ema);

            double values[18];
            values[0] = st.speed;
            values[1] = pressure;
            values[2] = st.speed * (1.0 - slip + rng.uniform(-0.004, 0.004));
            values[3] = st.speed * (1.0 - slip + rng.uniform(-0.004, 0.004));
            values[4] = st.speed * (1.0 - slip + rng.uniform(-0.004, 0.004));
            values[5] = st.speed * (1.0 - slip + rng.uniform(-0.004, 0.004));
            values[6] = st.ambient + st.temp_base_front + 26.0 * st.load_ema + rng.uniform(-4.0, 4.0);
            values[7] = st.ambient + st.temp_base_rear + 16.0 * st.load_ema + rng.uniform(-4.0, 4.0);
            values[8] = pressure * 1.05 + rng.uniform(-1.2, 1.2);
            values[9] = pressure * 1.8 + rng.uniform(-2.5, 2.5);
            values[10] = -(st.speed - st.prev_speed) / 3.6 / dt + rng.uniform(-0.6, 0.6);
            values[11] = rng.uniform(-0.5, 0.5);
            values[12] = rng.uniform(-2.2, 2.2);
            values[13] = 0.3 * pressure / 100.0 + rng.uniform(0.0, 0.12);
            // Clutch disengaged during under-brake runs: rpm sits at idle.
            values[14] = 820.0 + rng.uniform(-45.0, 45.0);
            values[15] = (braking ? 0.4 : 4.5) + rng.uniform(0.0, 1.0);
            values[16] = 13.9 - 0.6 * pressure / 100.0 + rng.uniform(-0.25, 0.25);
            values[17] = st.ambient + rng.uniform(-1.5, 1.5);

            for (std::size_t j = 0; j < n; ++j)
                features(row, j) = j < 18 ? values[j] : rng.uniform(-1.0, 1.0);

            row_ids.push_back("m" + std::to_string(mi) + ":" + std::to_string(si));
            ++row;
        }
    }
    return features;
}

std::vector<double> column_stddevs(const Matrix& m) {
    std::vector<double> out(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
        mean /= static_cast<double>(m.rows());
        double sq = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double d = m(i, j) - mean;
            sq += d * d;
        }
        out[j] = std::max(std::sqrt(sq / static_cast<double>(m.rows())), 1e-9);
    }
    return out;
}

// Ensures a perturbed cell really differs from its counterfactual and that
// the profile channels stay inside the physical envelope.
double finalize_cell(double perturbed, double original, double sigma, std::size_t channel) {
    const double lo = channel == 0 ? kSpeedEnvelopeMin : channel == 1 ? kBrakeEnvelopeMin : -1e300;
    const double hi = channel == 0 ? kSpeedEnvelopeMax : channel == 1 ? kBrakeEnvelopeMax : 1e300;
    perturbed = std::clamp(perturbed, lo, hi);
    if (perturbed == original) {
        const double nudge = std::max(0.05 * sigma, 1e-9);
        perturbed = original + nudge <= hi ? original + nudge : original - nudge;
        perturbed = std::clamp(perturbed, lo, hi);
    }
    return perturbed;
}

} // namespace

SynthResult generate_detailed(const ManeuverConfig& cfg, const AnomalySpec& spec) {
    cfg.validate();
    spec.validate(cfg.n_features);

    // Independent streams keep the clean signal identical for any anomaly
    // configuration under the same seed.
    Rng signal_rng(derive_seed(cfg.seed, "synth.signal"));
    Rng row_rng(derive_seed(cfg.seed, "synth.rows"));
    Rng perturb_rng(derive_seed(cfg.seed, "synth.perturb"));

    SynthResult result;
    result.data.feature_names = synth_feature_names(cfg.n_features);
    result.counterfactual = generate_clean(cfg, result.data.row_ids, signal_rng);
    result.data.features = result.counterfactual;

    const std::size_t m = result.data.features.rows();
    const auto n = static_cast<std::size_t>(cfg.n_features);
    const auto samples = static_cast<std::size_t>(cfg.samples_per_maneuver);
    const std::vector<double> sigma = column_stddevs(result.counterfactual);

    std::vector<double> labels(m, 0.0);
    const auto n_anom = static_cast<std::size_t>(
        std::llround(cfg.anomaly_rate * static_cast<double>(m)));
    const std::vector<std::size_t> anomalous_rows = row_rng.sample_without_replacement(m, n_anom);

    std::vector<std::size_t> ratio_pool;
    for (const std::size_t j : kRatioChannels)
        if (j < n) ratio_pool.push_back(j);
    const bool speed_group_present = n > 5;

    const auto c = static_cast<std::size_t>(spec.affected_feature_count);
    Matrix& features = result.data.features;

    // Spike-mode anomalies come in three flavors: plain marginal outliers
    // (low-density feature values), ratio breaks between coupled channels
    // (invisible to per-feature histograms, learnable from the other
    // channels), and regime readouts where the whole speed group reports a
    // coherent but wrong operating point. The last kind is inseparable from
    // normal rows wherever such operating points occur naturally, which is
    // what makes the artificial labeler and the classifier complement each
    // other on split envelopes.
    enum class Family { marginal, relational, regime };

    for (const std::size_t row : anomalous_rows) {
        labels[row] = 1.0;
        const std::size_t maneuver_start = row / samples * samples;

        Family family = Family::marginal;
        if (spec.mode == AnomalySpec::Mode::spike) {
            const double draw = perturb_rng.uniform();
            if (draw < 0.22 && c >= 5 && speed_group_present)
                family = Family::regime;
            else if (draw < 0.42 && ratio_pool.size() >= c)
                family = Family::relational;
        }

        std::vector<std::size_t> targets;
        if (family == Family::relational) {
            std::vector<std::size_t> pool = ratio_pool;
            perturb_rng.shuffle(pool);
            targets.assign(pool.begin(), pool.begin() + c);
        } else if (family == Family::regime) {
            targets.assign(std::begin(kSpeedGroup), std::end(kSpeedGroup));
            // The remaining budget becomes ordinary marginal spikes.
            while (targets.size() < c) {
                const std::size_t extra = perturb_rng.uniform_index(n);
                if (std::find(targets.begin(), targets.end(), extra) == targets.end())
                    targets.push_back(extra);
            }
        } else {
            // Marginal spikes stay off the speed readout group so the two
            // morphologies remain disjoint.
            std::vector<std::size_t> pool;
            for (std::size_t j = 0; j < n; ++j)
                if (!speed_group_present ||
                    std::find(std::begin(kSpeedGroup), std::end(kSpeedGroup), j) ==
                        std::end(kSpeedGroup))
                    pool.push_back(j);
            if (pool.size() < c) {
                targets = perturb_rng.sample_without_replacement(n, c);
            } else {
                perturb_rng.shuffle(pool);
                targets.assign(pool.begin(), pool.begin() + c);
                std::sort(targets.begin(), targets.end());
            }
        }

        // Coherent wrong operating point for the regime family: a low
        // rolling speed, read back by all wheel sensors with normal slip
        // and noise.
        const double fake_speed =
            family == Family::regime ? perturb_rng.uniform(2.0, 45.0) : 0.0;

        for (const std::size_t j : targets) {
            const double original = features(row, j);
            const double sign = perturb_rng.bernoulli(0.5) ? 1.0 : -1.0;
            double perturbed = original;

            if (family == Family::regime &&
                std::find(std::begin(kSpeedGroup), std::end(kSpeedGroup), j) !=
                    std::end(kSpeedGroup)) {
                // Wheels read the fake speed with the usual slip and noise.
                const double slip = 0.015 * features(row, 1) / 100.0;
                perturbed = j == 0 ? fake_speed
                                   : fake_speed * (1.0 - slip + perturb_rng.uniform(-0.004, 0.004));
            } else if (family == Family::relational) {
                perturbed = original * (1.0 + sign * perturb_rng.uniform(0.10, 0.18));
            } else {
                // Magnitude mixture: mostly clear outliers, plus a subtle
                // tail inside the channel's usual range that behaves like
                // label noise for every detector.
                const double scale = perturb_rng.uniform() < 0.7
                                         ? perturb_rng.uniform(1.0, 1.5)
                                         : perturb_rng.uniform(0.3, 0.55);
                const double delta = spec.magnitude_sigmas * sigma[j] * scale;
                switch (spec.mode) {
                    case AnomalySpec::Mode::spike:
                        perturbed = original + sign * delta;
                        break;
                    case AnomalySpec::Mode::drift: {
                        const double phase =
                            samples > 1 ? static_cast<double>(row - maneuver_start) /
                                              static_cast<double>(samples - 1)
                                        : 1.0;
                        perturbed = original + sign * delta * (0.25 + 0.75 * phase);
                        break;
                    }
                    case AnomalySpec::Mode::stuck:
                        perturbed = features(maneuver_start, j);
                        break;
                }
            }
            features(row, j) = finalize_cell(perturbed, original, sigma[j], j);
        }
    }

    result.data.labels = std::move(labels);
    return result;
}

Dataset generate(const ManeuverConfig& cfg, const AnomalySpec& spec) {
    return generate_detailed(cfg, spec).data;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& target_name) {
    std::ofstream out(path);
    if (!out) throw IoError("write_csv: cannot open '" + path.string() + "' for writing");

    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j > 0) out << ',';
        out << ds.feature_names[j];
    }
    if (ds.labels) out << (ds.feature_names.empty() ? "" : ",") << target_name;
    out << '\n';

    char buf[64];
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_cols(); ++j) {
            if (j > 0) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
            out << buf;
        }
        if (ds.labels) out << ',' << ((*ds.labels)[i] == 1.0 ? '1' : '0');
        out << '\n';
    }
    if (!out) throw IoError("write_csv: failed while writing '" + path.string() + "'");
}

} // namespace saad
