#pragma once

#include <string>
#include <vector>

#include "surro/rng.hpp"

namespace surro {

// Dense feed-forward net: rectifier hidden layers, identity output,
// optional inverted dropout on hidden activations during training.
struct Mlp {
    std::vector<int> layer_dims;                 // [d_in, hidden..., d_out]
    std::vector<std::vector<double>> weights;    // per layer, row-major [out][in]
    std::vector<std::vector<double>> biases;     // per layer
    double dropout_rate = 0.0;                   // [0, 1)

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    std::size_t num_layers() const { return weights.size(); }

    // Uniform init scaled by 1/sqrt(fan_in), seeded.
    static Mlp init(const std::vector<int>& layer_dims, double dropout_rate,
                    RngStream& stream);
};

// Mirrors the parameter shapes of an Mlp.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static Gradients zeros_like(const Mlp& net);
    void accumulate(const Gradients& other, double scale);
};

struct Minibatch {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
};

std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                            bool training = false, RngStream* stream = nullptr);

// Mean over the batch of per-sample mean squared error, plus gradients of
// that loss w.r.t. every parameter (dropout masks shared between the forward
// and backward pass).
double backward(const Mlp& net, const Minibatch& batch, Gradients& grads,
                bool training = false, RngStream* stream = nullptr);

// Adaptive-moment optimizer with bias correction.
struct OptimizerState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step_count = 0;
    Gradients first_moment;
    Gradients second_moment;

    static OptimizerState create(const Mlp& net, double learning_rate);
};

void optimizer_step(Mlp& net, const Gradients& grads, OptimizerState& opt);

// Decimal JSON serialization; round-trips all parameters exactly.
std::string save_weights(const Mlp& net);
Mlp load_weights(const std::string& document);

}  // namespace surro
