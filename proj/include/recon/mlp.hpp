#pragma once

#include <vector>

namespace recon {

// Fully-connected SDF head: affine layers with leaky-ReLU (slope 0.01) hidden
// activations and a linear scalar output.
struct MlpParams {
    std::vector<int> widths;               // e.g. {369, 512, 256, 128, 1}
    std::vector<std::vector<double>> weights;  // per layer, [in][out] row-major
    std::vector<std::vector<double>> biases;

    MlpParams() = default;
    explicit MlpParams(std::vector<int> layer_widths);

    int in_dim() const { return widths.front(); }
    int out_dim() const { return widths.back(); }
    size_t layer_count() const { return weights.size(); }
};

struct MlpGradients {
    std::vector<std::vector<double>> d_weights;
    std::vector<std::vector<double>> d_biases;

    explicit MlpGradients(const MlpParams& params);
};

// Per-sample activations for the backward pass.
struct MlpActivations {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // input + post-activation per layer
};

double mlp_forward(const MlpParams& params, const double* input,
                   MlpActivations* acts = nullptr);

// d_output is the scalar cotangent. Writes the input cotangent to d_input
// (in_dim entries) and accumulates parameter gradients. Thread-safe when
// each thread owns its own MlpGradients.
void mlp_backward(const MlpParams& params, const MlpActivations& acts, double d_output,
                  double* d_input, MlpGradients& grads);

constexpr double kLeakySlope = 0.01;

}  // namespace recon
