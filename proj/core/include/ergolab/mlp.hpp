#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ergolab {

/// Dense feed-forward network with ReLU hidden layers and a linear output
/// layer. Parameters live in plain vectors; all operations on them are free
/// functions so that networks stay cheap to copy and trivially thread-safe
/// (one instance per worker).
struct Mlp {
    std::vector<int> layer_dims;                // input, hidden..., output widths
    std::vector<std::vector<double>> weights;   // [layer] row-major, dims[l+1] x dims[l]
    std::vector<std::vector<double>> biases;    // [layer] dims[l+1]

    int layer_count() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
};

/// Per-layer pre-activations and activations recorded by a forward pass,
/// needed to run the matching backward pass.
struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre_activations;
    std::vector<std::vector<double>> activations;
};

/// Gradient mirror of an Mlp's parameters.
struct ParamGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void scale(double factor);
};

/// Adam optimiser state; moment shapes mirror the network parameters.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_stability = 1e-8;
    long step_count = 0;
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
};

/// Deterministic initialisation: weights uniform in [-1/sqrt(fan_in),
/// +1/sqrt(fan_in)], biases zero.
Mlp mlp_init(std::span<const int> layer_dims, std::uint64_t seed);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                ForwardCache& cache);

ParamGrads zero_grads(const Mlp& net);

/// Reverse-mode gradients of output . output_grad w.r.t. every parameter.
/// The ReLU subgradient at exactly 0 is taken as 0.
ParamGrads mlp_backward(const Mlp& net, const ForwardCache& cache,
                        std::span<const double> output_grad);

/// Same as mlp_backward but accumulates into an existing gradient buffer
/// (used for mini-batch sums).
void mlp_backward_into(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad, ParamGrads& into);

struct SmoothL1Result {
    double loss;
    double gradient;  // d loss / d prediction
};

/// Smooth-L1 with unit transition point: 0.5 d^2 for |d| < 1, |d| - 0.5
/// otherwise, d = prediction - target.
SmoothL1Result smooth_l1(double prediction, double target);

AdamState adam_init(const Mlp& net, double learning_rate);

/// One Adam update with bias correction over a flat parameter block.
/// step_count is the post-increment step number (1 on the first call).
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long step_count,
                 double learning_rate, double beta1, double beta2, double epsilon);

/// Applies one Adam step to every parameter of the network.
void adam_step(Mlp& net, const ParamGrads& grads, AdamState& state);

/// Central-difference verification of the analytic gradients under a
/// Smooth-L1 head summed over outputs. Returns the max over parameters of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double grad_check(const Mlp& net, std::span<const double> input,
                  std::span<const double> targets);

}  // namespace ergolab
