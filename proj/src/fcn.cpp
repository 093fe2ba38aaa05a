#include "saad/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace saad {

namespace {

constexpr double kClamp = 1e-7;

// Keeps v strictly inside (0, 1) even for saturating pre-activations.
constexpr double kOutputClamp = 1e-12;

double sigmoid(double z) {
    double v;
    if (z >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        v = e / (1.0 + e);
    }
    return std::clamp(v, kOutputClamp, 1.0 - kOutputClamp);
}

ParamTensors zeros_like(const Network& net) {
    ParamTensors t;
    t.weights.reserve(net.layer_count());
    t.biases.reserve(net.layer_count());
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        t.weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
        t.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return t;
}

void check_input(const Network& net, std::span<const double> x) {
    if (x.size() != net.input_dim)
        throw ValidationError("forward: input has " + std::to_string(x.size()) +
                              " values, network expects " + std::to_string(net.input_dim));
}

double forward_impl(const Network& net, std::span<const double> x, Rng* dropout_rng,
                    ForwardCache* cache) {
    check_input(net, x);
    const std::size_t n_layers = net.layer_count();

    if (cache != nullptr) {
        cache->layer_inputs.assign(n_layers, {});
        cache->pre_activations.assign(n_layers, {});
        cache->dropout_scales.assign(n_layers > 0 ? n_layers - 1 : 0, {});
    }

    std::vector<double> activation(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Matrix& w = net.weights[l];
        const std::vector<double>& b = net.biases[l];
        if (cache != nullptr) cache->layer_inputs[l] = activation;

        std::vector<double> z(w.cols());
        for (std::size_t j = 0; j < w.cols(); ++j) {
            double acc = b[j];
            for (std::size_t i = 0; i < w.rows(); ++i) acc += activation[i] * w(i, j);
            z[j] = acc;
        }
        if (cache != nullptr) cache->pre_activations[l] = z;

        if (l + 1 == n_layers) {
            activation = {sigmoid(z[0])};
            break;
        }

        std::vector<double> h(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) h[j] = std::max(0.0, z[j]);

        const double rate = net.config.dropout_rates[l];
        std::vector<double> scales(h.size(), 1.0);
        if (dropout_rng != nullptr && rate > 0.0) {
            const double keep = 1.0 - rate;
            for (std::size_t j = 0; j < h.size(); ++j) {
                // Inverted dropout: kept units are scaled so inference
                // needs no adjustment.
                scales[j] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
                h[j] *= scales[j];
            }
        }
        if (cache != nullptr) cache->dropout_scales[l] = std::move(scales);
        activation = std::move(h);
    }

    const double v = activation[0];
    if (cache != nullptr) cache->output = v;
    return v;
}

} // namespace

void NetworkConfig::validate() const {
    if (hidden_sizes.empty())
        throw ValidationError("NetworkConfig: need at least one hidden layer");
    for (const std::size_t size : hidden_sizes)
        if (size == 0) throw ValidationError("NetworkConfig: hidden layer size must be positive");
    if (dropout_rates.size() != hidden_sizes.size())
        throw ValidationError("NetworkConfig: dropout_rates length (" +
                              std::to_string(dropout_rates.size()) +
                              ") must equal hidden layer count (" +
                              std::to_string(hidden_sizes.size()) + ")");
    for (const double rate : dropout_rates)
        if (!(rate >= 0.0 && rate < 1.0))
            throw ValidationError("NetworkConfig: dropout rates must lie in [0, 1)");
    if (l2_lambda < 0.0) throw ValidationError("NetworkConfig: l2_lambda must be non-negative");
    if (!(learning_rate > 0.0)) throw ValidationError("NetworkConfig: learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw ValidationError("NetworkConfig: adam betas must lie in (0, 1)");
    if (!(adam_epsilon > 0.0)) throw ValidationError("NetworkConfig: adam_epsilon must be positive");
    if (max_epochs == 0) throw ValidationError("NetworkConfig: max_epochs must be positive");
    if (patience == 0) throw ValidationError("NetworkConfig: patience must be positive");
    if (batch_size == 0) throw ValidationError("NetworkConfig: batch_size must be positive");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ValidationError("NetworkConfig: validation_fraction must lie in (0, 1)");
}

Network init_network(std::size_t input_dim, const NetworkConfig& cfg) {
    if (input_dim == 0) throw ValidationError("init_network: input_dim must be positive");
    cfg.validate();

    Network net;
    net.config = cfg;
    net.input_dim = input_dim;

    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    dims.push_back(1);

    Rng rng(derive_seed(cfg.seed, "fcn.init"));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& value : w.storage()) value = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

double forward(const Network& net, std::span<const double> x, ForwardCache* cache) {
    return forward_impl(net, x, nullptr, cache);
}

double forward_train(const Network& net, std::span<const double> x, Rng& rng,
                     ForwardCache& cache) {
    return forward_impl(net, x, &rng, &cache);
}

double bce_l2_loss(double v, int y, const Network& net) {
    const double clamped = std::clamp(v, kClamp, 1.0 - kClamp);
    double loss = -(y == 1 ? std::log(clamped) : std::log(1.0 - clamped));
    if (net.config.l2_lambda > 0.0) {
        double sq = 0.0;
        for (const Matrix& w : net.weights)
            for (const double value : w.storage()) sq += value * value;
        loss += net.config.l2_lambda * sq;
    }
    return loss;
}

Gradients backward(const Network& net, const ForwardCache& cache, int y) {
    const std::size_t n_layers = net.layer_count();
    if (cache.layer_inputs.size() != n_layers || cache.pre_activations.size() != n_layers)
        throw ValidationError("backward: cache does not match the network");

    Gradients grads = zeros_like(net);

    // Sigmoid + BCE: dL/dz at the output is v - y, zero when the loss clamp
    // is active (the clamped loss is flat there).
    const double v = cache.output;
    double delta_out = 0.0;
    if (v > kClamp && v < 1.0 - kClamp) delta_out = v - static_cast<double>(y);

    std::vector<double> delta{delta_out};
    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& w = net.weights[l];
        const std::vector<double>& input = cache.layer_inputs[l];

        for (std::size_t j = 0; j < w.cols(); ++j) {
            grads.biases[l][j] = delta[j];
            for (std::size_t i = 0; i < w.rows(); ++i)
                grads.weights[l](i, j) = input[i] * delta[j];
        }

        if (l == 0) break;

        // Propagate to the previous hidden layer: through the weights, the
        // dropout scale, and the ReLU derivative.
        std::vector<double> prev(w.rows(), 0.0);
        for (std::size_t i = 0; i < w.rows(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w.cols(); ++j) acc += w(i, j) * delta[j];
            acc *= cache.dropout_scales[l - 1][i];
            if (cache.pre_activations[l - 1][i] <= 0.0) acc = 0.0;
            prev[i] = acc;
        }
        delta = std::move(prev);
    }

    if (net.config.l2_lambda > 0.0) {
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& w = net.weights[l].storage();
            auto& g = grads.weights[l].storage();
            for (std::size_t i = 0; i < w.size(); ++i) g[i] += 2.0 * net.config.l2_lambda * w[i];
        }
    }
    return grads;
}

AdamState make_adam_state(const Network& net) {
    AdamState state;
    state.first_moments = zeros_like(net);
    state.second_moments = zeros_like(net);
    return state;
}

void adam_update(Network& net, AdamState& state, const Gradients& grads, double lr) {
    if (grads.weights.size() != net.layer_count())
        throw ValidationError("adam_update: gradient shapes do not match the network");

    const double b1 = net.config.adam_beta1;
    const double b2 = net.config.adam_beta2;
    const double eps = net.config.adam_epsilon;

    state.timestep += 1;
    const double t = static_cast<double>(state.timestep);
    const double correction1 = 1.0 - std::pow(b1, t);
    const double correction2 = 1.0 - std::pow(b2, t);

    auto update = [&](double& param, double& m, double& s, double g) {
        m = b1 * m + (1.0 - b1) * g;
        s = b2 * s + (1.0 - b2) * g * g;
        const double m_hat = m / correction1;
        const double s_hat = s / correction2;
        param -= lr * m_hat / (std::sqrt(s_hat) + eps);
    };

    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& w = net.weights[l].storage();
        auto& mw = state.first_moments.weights[l].storage();
        auto& sw = state.second_moments.weights[l].storage();
        const auto& gw = grads.weights[l].storage();
        if (gw.size() != w.size())
            throw ValidationError("adam_update: weight gradient shape mismatch at layer " +
                                  std::to_string(l));
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], mw[i], sw[i], gw[i]);

        auto& b = net.biases[l];
        auto& mb = state.first_moments.biases[l];
        auto& sb = state.second_moments.biases[l];
        const auto& gb = grads.biases[l];
        if (gb.size() != b.size())
            throw ValidationError("adam_update: bias gradient shape mismatch at layer " +
                                  std::to_string(l));
        for (std::size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], sb[i], gb[i]);
    }
}

namespace {

void accumulate(Gradients& into, const Gradients& grads) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        auto& w = into.weights[l].storage();
        const auto& g = grads.weights[l].storage();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += g[i];
        for (std::size_t i = 0; i < into.biases[l].size(); ++i)
            into.biases[l][i] += grads.biases[l][i];
    }
}

void scale(Gradients& grads, double factor) {
    for (auto& w : grads.weights)
        for (double& value : w.storage()) value *= factor;
    for (auto& b : grads.biases)
        for (double& value : b) value *= factor;
}

} // namespace

std::pair<Network, TrainHistory> train(const Dataset& ds, const NetworkConfig& cfg) {
    cfg.validate();
    if (!ds.labels) throw ValidationError("train: dataset has no labels");
    const std::vector<int> labels = ds.int_labels();
    const std::size_t m = ds.n_rows();
    if (m < cfg.batch_size)
        throw ValidationError("train: dataset (" + std::to_string(m) +
                              " rows) is smaller than one batch (" +
                              std::to_string(cfg.batch_size) + ")");

    // Held-out validation split.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    Rng split_rng(derive_seed(cfg.seed, "fcn.val_split"));
    split_rng.shuffle(order);
    std::size_t val_size = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(m)));
    val_size = std::clamp<std::size_t>(val_size, 1, m - 1);
    const std::vector<std::size_t> val_idx(order.begin(), order.begin() + val_size);
    std::vector<std::size_t> train_idx(order.begin() + val_size, order.end());

    Network net = init_network(ds.n_cols(), cfg);
    AdamState state = make_adam_state(net);
    Rng train_rng(derive_seed(cfg.seed, "fcn.train"));

    TrainHistory history;
    double best_val_loss = std::numeric_limits<double>::infinity();
    Network best_net = net;
    std::size_t epochs_without_improvement = 0;

    ForwardCache cache;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        train_rng.shuffle(train_idx);

        double epoch_bce = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, train_idx.size());
            Gradients batch_grads = zeros_like(net);
            for (std::size_t r = start; r < end; ++r) {
                const std::size_t i = train_idx[r];
                const double v = forward_train(net, ds.features.row(i), train_rng, cache);
                epoch_bce += bce_l2_loss(v, labels[i], net);
                accumulate(batch_grads, backward(net, cache, labels[i]));
            }
            scale(batch_grads, 1.0 / static_cast<double>(end - start));
            adam_update(net, state, batch_grads, cfg.learning_rate);
        }

        EpochStats stats;
        stats.train_loss = epoch_bce / static_cast<double>(train_idx.size());

        double val_bce = 0.0;
        std::size_t val_correct = 0;
        for (const std::size_t i : val_idx) {
            const double v = forward(net, ds.features.row(i));
            const double clamped = std::clamp(v, kClamp, 1.0 - kClamp);
            val_bce += -(labels[i] == 1 ? std::log(clamped) : std::log(1.0 - clamped));
            if ((v > 0.5 ? 1 : 0) == labels[i]) ++val_correct;
        }
        stats.val_loss = val_bce / static_cast<double>(val_idx.size());
        stats.val_accuracy = static_cast<double>(val_correct) / static_cast<double>(val_idx.size());
        history.epochs.push_back(stats);

        if (stats.val_loss < best_val_loss) {
            best_val_loss = stats.val_loss;
            best_net = net;
            history.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= cfg.patience) {
                history.stopped_early = true;
                break;
            }
        }
    }

    return {std::move(best_net), std::move(history)};
}

Prediction predict(const Network& net, std::span<const double> x) {
    const double v = forward(net, x);
    return {v > 0.5 ? 1 : 0, v};
}

} // namespace saad
