#pragma once

#include "recon/pipeline.hpp"

namespace recon {

// Signed distances sampled at grid cell centers. Index layout
// (k * ny + j) * nx + i with i along x fastest.
struct ScalarField {
    GridSpec spec;
    std::vector<double> values;

    double at(int i, int j, int k) const {
        return values[(static_cast<size_t>(k) * spec.dims[1] + j) * spec.dims[0] + i];
    }
    double& at(int i, int j, int k) {
        return values[(static_cast<size_t>(k) * spec.dims[1] + j) * spec.dims[0] + i];
    }
};

struct FieldOptions {
    int m_resolution = 128;
    double jitter_sigma = -1.0;  // < 0: 2x voxel spacing
    double pad = -1.0;           // < 0: 5% of the largest cloud extent
    uint64_t seed = 0;
    size_t chunk = 65536;  // grid points per evaluation chunk
};

// Builds the inference grid from the depth cloud and evaluates the learned
// SDF at every cell center.
ScalarField evaluate_field(const ReconModel& model, const SceneInputs& scene,
                           const FieldOptions& opts);

}  // namespace recon
