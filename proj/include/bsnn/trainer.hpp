#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsnn/mnist.hpp"
#include "bsnn/network.hpp"
#include "bsnn/shapley.hpp" // SpikeEncoding
#include "bsnn/simulate.hpp"

namespace bsnn {

struct TrainConfig {
    std::vector<int> digits{1, 5, 9};
    int hidden_count = 16;
    WeightScale scale = WeightScale::Binary;
    SpikeEncoding encoding = SpikeEncoding::Thresholded;
    int t_end = 1;
    int epochs = 120;
    double learning_rate = 0.05;
    int batch_size = 64;
    std::uint64_t seed = 1;

    // desk-scale knobs
    int max_train_images = 12000;
    int restarts = 3; // independent inits; the best validation snapshot wins

    // optimization internals
    double momentum = 0.9;
    double softmax_temperature = 6.0;
    double positive_fraction = 0.15; // share of first-layer weights starting positive
    double weight_clip = 0.2;
    double threshold_floor = 1.0;

    void validate() const; // throws ConfigError; thresholded forces t_end == 1
};

// Full-precision training state; quantizing it yields the deployed network.
struct ProxyWeights {
    std::vector<double> hidden_weights; // hidden x input, row-major
    std::vector<double> output_weights; // output x hidden, row-major
    std::vector<double> hidden_thresholds;
    std::vector<double> output_thresholds;
};

struct TrainMetrics {
    double val_accuracy = 0.0;
    double test_accuracy = -1.0; // filled by the caller when a test set exists
    int epochs = 0;
    std::uint64_t seed = 0;
    std::vector<double> epoch_losses; // winning restart
    int best_epoch = 0;
    int best_restart = 0;
    double wall_time_ms = 0.0;
};

struct TrainResult {
    NetworkArchitecture arch;
    ProxyWeights proxy;
    TrainMetrics metrics;
};

// Surrogate-gradient training: quantized forward pass with the exact
// integer dynamics, arctan surrogate + straight-through estimator backward,
// SGD with momentum. Thresholds are trained alongside the weights and
// exported as integers (see README on the threshold choice).
TrainResult train(const TrainConfig& cfg, const LabeledDataset& train_set,
                  const LabeledDataset& val_set);

double evaluate(const NetworkArchitecture& arch, const LabeledDataset& dataset,
                SpikeEncoding encoding, int t_end, std::uint64_t seed);

// smooth stand-in for the Heaviside step and its analytic derivative
double arctan_surrogate(double x, double slope = 2.0);
double arctan_surrogate_grad(double x, double slope = 2.0);

// elementwise quantization of the proxy, plus rounded integer thresholds
NetworkArchitecture quantize_proxy(const ProxyWeights& proxy, int input_count, int hidden_count,
                                   int output_count, WeightScale scale);

std::string metrics_to_json(const TrainMetrics& metrics);

} // namespace bsnn
