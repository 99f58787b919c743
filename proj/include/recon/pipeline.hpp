#pragma once

#include "recon/geometry.hpp"
#include "recon/model.hpp"
#include "recon/sparse_tensor.hpp"

namespace recon {

// One RGB-D view ready for the network.
struct SceneInputs {
    VectorImage rgb;      // 3 channels
    VectorImage normals;  // 3 channels
    ScalarImage depth;
    OrthoCamera cam;
};

// Everything the forward pass produces that predict/backward need. Owns all
// activations so a backward pass can follow.
struct PipelineCache {
    OrthoCamera cam;
    VectorImage input6;
    FeActivations lr_acts, hr_acts;
    VectorImage lr_map, hr_map;

    Vec3 vox_origin = Vec3::Zero();
    double spacing = 0.0;
    SparseVoxelTensor vox;                           // VFE input embedding
    std::vector<std::pair<double, double>> site_uv;  // projected cell centers
    bool random_embedding = false;

    VfeActivations vfe_acts;
    CodeVolumes codes;
};

// Pixel-aligned voxel embedding: every site samples the LR feature map at the
// projection of its cell center. stride = 1. In random-embedding mode the
// features are seeded N(0,1) keyed by site coordinate, ignoring the map.
SparseVoxelTensor build_sparse(const std::vector<VoxelCoord>& sites,
                               const VectorImage& lr_feature_map, const OrthoCamera& cam,
                               double spacing, const Vec3& origin,
                               bool random_embedding = false, uint64_t seed = 0,
                               std::vector<std::pair<double, double>>* site_uv = nullptr);

// Runs 2D extraction, voxelization of the depth map, embedding and the VFE.
// Deterministic; the cache is reusable for any number of point batches.
void forward_features(const ReconModel& model, const SceneInputs& scene,
                      PipelineCache& cache, uint64_t embed_seed = 0);

// Pixel-voxel-aligned SDF head: per point projects through the camera,
// samples HR features and multi-scale codes, appends normalized depth and
// runs the MLP. Same weights serve grid samples and point-cloud points.
void predict_sdf(const ReconModel& model, const PipelineCache& cache,
                 const std::vector<Vec3>& points, std::vector<double>& out);

// Reverse-mode pass for a batch: d_preds are cotangents of predict_sdf
// outputs. Accumulates into grads across every learnable tensor.
void backward_sdf(const ReconModel& model, PipelineCache& cache,
                  const std::vector<Vec3>& points, const std::vector<double>& d_preds,
                  ModelGradients& grads);

}  // namespace recon
