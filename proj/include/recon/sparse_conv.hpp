#pragma once

#include "recon/sparse_tensor.hpp"

namespace recon {

// One 3x3x3 sparse convolution layer. Weights are [27][c_in][c_out]
// row-major, bias [c_out]. For inverse2 the matching strided2 layer's fine
// site set must be supplied so the scatter target is exact.
struct SparseConv {
    int c_in = 0;
    int c_out = 0;
    ConvMode mode = ConvMode::submanifold;
    std::vector<double> weights;  // 27 * c_in * c_out
    std::vector<double> bias;     // c_out

    SparseConv() = default;
    SparseConv(int in, int out, ConvMode m)
        : c_in(in), c_out(out), mode(m), weights(27ull * in * out, 0.0), bias(out, 0.0) {}

    size_t weight_count() const { return weights.size(); }
};

// Cached forward state for the backward pass.
struct SparseConvContext {
    ConvRulebook rulebook;
    const SparseVoxelTensor* input = nullptr;  // borrowed; must outlive backward
};

// target_fine_sites: required for inverse2, ignored otherwise.
SparseVoxelTensor sparse_conv_forward(const SparseVoxelTensor& x, const SparseConv& layer,
                                      const std::vector<VoxelCoord>* target_fine_sites,
                                      SparseConvContext* ctx);

// d_out has the output tensor's shape. Accumulates into d_weights/d_bias
// (same layout as the layer) and returns the input cotangent.
SparseVoxelTensor sparse_conv_backward(const SparseConvContext& ctx, const SparseConv& layer,
                                       const SparseVoxelTensor& d_out,
                                       std::vector<double>& d_weights,
                                       std::vector<double>& d_bias);

}  // namespace recon
