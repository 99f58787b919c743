#pragma once

#include <array>
#include <deque>

#include "recon/sparse_conv.hpp"

namespace recon {

// 28-layer submanifold-sparse U-Net over the voxelized depth cloud. Channel
// widths are (base, 2*base, 4*base, 8*base) along the encoder; three strided
// downsamples, three exact inverse upsamples, three skip concatenations.
// ReLU follows every conv. Decoder outputs at strides 1/2/4 are the
// multi-scale code volumes.
struct VfeParams {
    int in_channels = 0;
    int base = 16;
    std::vector<SparseConv> layers;  // 28 entries

    VfeParams() = default;
    VfeParams(int in_channels, int base);

    int code_channels() const { return base + 2 * base + 4 * base; }
};

struct CodeVolumes {
    // levels[0] stride 1 (width base), levels[1] stride 2, levels[2] stride 4.
    std::array<SparseVoxelTensor, 3> levels;
    Vec3 origin = Vec3::Zero();  // world origin of the stride-1 lattice
    double spacing = 1.0;        // world units per stride-1 cell

    int total_channels() const {
        return levels[0].channels + levels[1].channels + levels[2].channels;
    }
};

// Forward cache; owns every intermediate tensor so conv contexts stay valid.
struct VfeActivations {
    std::deque<SparseVoxelTensor> tensors;
    std::vector<SparseConvContext> ctxs;       // one per conv layer
    std::vector<const SparseVoxelTensor*> pre;  // pre-ReLU output per layer
    std::vector<const SparseVoxelTensor*> post; // post-ReLU output per layer
    const SparseVoxelTensor* input = nullptr;
};

// x.channels must equal params.in_channels; x.stride must be 1.
CodeVolumes vfe_forward(const SparseVoxelTensor& x, const VfeParams& params,
                        const Vec3& origin, double spacing,
                        VfeActivations* acts = nullptr);

struct VfeGradients {
    std::vector<std::vector<double>> d_weights;  // per layer
    std::vector<std::vector<double>> d_bias;

    explicit VfeGradients(const VfeParams& params);
    void accumulate_scaled(const VfeGradients& other, double scale);
};

// d_codes holds cotangents aligned with the three code volumes. Returns the
// cotangent of the VFE input tensor.
SparseVoxelTensor vfe_backward(const VfeParams& params, const VfeActivations& acts,
                               const std::array<SparseVoxelTensor, 3>& d_codes,
                               VfeGradients& grads);

// Trilinear blend over the 8 surrounding sites at each scale, absent sites
// zero, concatenated over scales. out must hold codes.total_channels().
void trilinear_query(const CodeVolumes& codes, const Vec3& p, double* out);

// Adjoint: scatters d_out into d_levels (tensors shaped like codes.levels).
void trilinear_query_backward(const CodeVolumes& codes, const Vec3& p,
                              const double* d_out,
                              std::array<SparseVoxelTensor, 3>& d_levels);

}  // namespace recon
