#pragma once

#include <vector>

#include "recon/image.hpp"

namespace recon {

// 3x3 same-padded dense 2D convolution. Weight layout [9][c_in][c_out]
// row-major, bias [c_out]; stride 1 or 2.
struct Conv2D {
    int c_in = 0;
    int c_out = 0;
    int stride = 1;
    std::vector<double> weights;  // 9 * c_in * c_out
    std::vector<double> bias;     // c_out

    Conv2D() = default;
    Conv2D(int in, int out, int stride_)
        : c_in(in), c_out(out), stride(stride_), weights(9ull * in * out, 0.0),
          bias(out, 0.0) {}
};

VectorImage conv2d_forward(const VectorImage& x, const Conv2D& layer);

// d_out matches the forward output shape. Returns d_input; accumulates into
// d_weights / d_bias.
VectorImage conv2d_backward(const VectorImage& x, const Conv2D& layer,
                            const VectorImage& d_out, std::vector<double>& d_weights,
                            std::vector<double>& d_bias);

// Nearest-neighbor 2x upsample cropped to (out_w, out_h).
VectorImage upsample2x(const VectorImage& x, int out_w, int out_h);
VectorImage upsample2x_backward(const VectorImage& d_out, int in_w, int in_h);

// Symmetric encoder-decoder stack over 2D images: a strided stem sets the
// output resolution, then `stacks` hourglass blocks (downsample, conv,
// upsample, skip addition). All hidden activations ReLU.
struct FeatureExtractorParams {
    int in_channels = 0;
    int width = 0;       // output channel count
    int out_stride = 1;  // 1 (full res) or 2 (half res)
    int stacks = 2;
    std::vector<Conv2D> layers;  // stem + 3 per stack

    FeatureExtractorParams() = default;
    FeatureExtractorParams(int in_channels, int width, int out_stride, int stacks);
};

struct FeGradients {
    std::vector<std::vector<double>> d_weights;
    std::vector<std::vector<double>> d_bias;

    explicit FeGradients(const FeatureExtractorParams& params);
};

struct FeActivations {
    std::vector<VectorImage> saved;  // inputs/pre-activations in layer order
};

VectorImage fe_forward(const VectorImage& x, const FeatureExtractorParams& params,
                       FeActivations* acts = nullptr);

VectorImage fe_backward(const FeatureExtractorParams& params, const FeActivations& acts,
                        const VectorImage& d_out, FeGradients& grads);

}  // namespace recon
