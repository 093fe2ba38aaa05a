#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "saad/dataset.hpp"
#include "saad/matrix.hpp"
#include "saad/random.hpp"

namespace saad {

struct NetworkConfig {
    std::vector<std::size_t> hidden_sizes{32, 16};
    std::vector<double> dropout_rates{0.2, 0.2};
    double l2_lambda = 1e-4;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::size_t batch_size = 32;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/**
 * Fully connected binary classifier: ReLU hidden layers, one sigmoid output
 * unit. Layer l's weight matrix is fan_in x fan_out.
 */
struct Network {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    NetworkConfig config;
    std::size_t input_dim = 0;

    std::size_t layer_count() const { return weights.size(); }
};

/// Per-parameter values with the same shapes as a Network's weights/biases.
struct ParamTensors {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

using Gradients = ParamTensors;

struct AdamState {
    ParamTensors first_moments;
    ParamTensors second_moments;
    std::uint64_t timestep = 0;
};

struct Prediction {
    int label = 0;
    double confidence = 0.0; // sigmoid output v
};

/// Intermediate values captured by forward for use in backward.
struct ForwardCache {
    std::vector<std::vector<double>> layer_inputs;  // a^0 .. a^(L-1)
    std::vector<std::vector<double>> pre_activations;
    // Per hidden unit: mask/(1-rate) applied during train-mode forward,
    // all 1.0 in inference mode.
    std::vector<std::vector<double>> dropout_scales;
    double output = 0.0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0; // 1-based
    bool stopped_early = false;
};

/// Seeded scaled-uniform init, bound sqrt(6 / (fan_in + fan_out)); zero biases.
Network init_network(std::size_t input_dim, const NetworkConfig& cfg);

/// Inference-mode forward pass (no dropout). Returns v in (0, 1).
double forward(const Network& net, std::span<const double> x, ForwardCache* cache = nullptr);

/// Train-mode forward pass: inverted dropout with masks drawn from rng.
double forward_train(const Network& net, std::span<const double> x, Rng& rng,
                     ForwardCache& cache);

/// Binary cross entropy (v clamped to [1e-7, 1-1e-7] inside the loss only)
/// plus l2_lambda * sum of squared weights; biases are not regularized.
double bce_l2_loss(double v, int y, const Network& net);

/// Exact gradients of bce_l2_loss for the sample captured in cache,
/// respecting the dropout scales used during the forward pass.
Gradients backward(const Network& net, const ForwardCache& cache, int y);

AdamState make_adam_state(const Network& net);

/// Standard Adam step with bias correction; increments state.timestep.
void adam_update(Network& net, AdamState& state, const Gradients& grads, double lr);

/**
 * Mini-batch Adam training with a seeded shuffle per epoch, a held-out
 * validation split, and early stopping on validation loss. The returned
 * network carries the parameters of the best validation epoch.
 */
std::pair<Network, TrainHistory> train(const Dataset& ds, const NetworkConfig& cfg);

/// Inference: label 1 iff v > 0.5.
Prediction predict(const Network& net, std::span<const double> x);

} // namespace saad
