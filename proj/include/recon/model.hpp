#pragma once

#include <string>

#include "recon/config.hpp"
#include "recon/conv2d.hpp"
#include "recon/mlp.hpp"
#include "recon/vfe.hpp"

namespace recon {

// Architecture/sampling hyperparameters. Channel widths are scalable; the
// defaults below are desk-scale, paper-scale values go through config files.
struct ModelConfig {
    int w_lr = 32;        // LR feature width (VFE input embedding)
    int w_hr = 16;        // HR feature width
    int fe_stacks = 2;    // hourglass stacks per 2D extractor
    int vfe_base = 16;    // VFE encoder base width
    std::vector<int> mlp_hidden = {512, 256, 128};
    double voxel_spacing_norm = 0.02;  // stride-1 voxel edge, normalized units
    double sigma_lr_norm = 0.05;
    double sigma_hr_norm = 0.007;
    double uniform_frac = 1.0 / 16.0;
    int n_k = 2;  // semantic augmentation recursion depth
    double delta = 1.25;
    bool random_voxel_features = false;  // ablation: seeded N(0,1) embeddings

    int code_channels() const { return 7 * vfe_base; }
    int mlp_in() const { return w_hr + code_channels() + 1; }

    static ModelConfig from_config(const Config& cfg);
    Config to_config() const;
};

struct ReconModel {
    ModelConfig config;
    FeatureExtractorParams lr_fe;
    FeatureExtractorParams hr_fe;
    VfeParams vfe;
    MlpParams mlp;

    ReconModel() = default;
    explicit ReconModel(const ModelConfig& cfg);
};

// Seeded He-normal weight init, zero biases.
void init_model(ReconModel& model, uint64_t seed);

struct ModelGradients {
    FeGradients lr_fe;
    FeGradients hr_fe;
    VfeGradients vfe;
    MlpGradients mlp;

    explicit ModelGradients(const ReconModel& model)
        : lr_fe(model.lr_fe), hr_fe(model.hr_fe), vfe(model.vfe), mlp(model.mlp) {}
};

// Flat views over every learnable tensor; parameter and gradient lists share
// one ordering.
struct TensorView {
    std::string name;
    double* data;
    size_t size;
};

std::vector<TensorView> param_tensors(ReconModel& model);
std::vector<TensorView> grad_tensors(const ReconModel& model, ModelGradients& grads);

// Checkpoint: structured-text config header followed by named TNSR blobs.
void save_checkpoint(const std::string& path, const ReconModel& model);
ReconModel load_checkpoint(const std::string& path);

}  // namespace recon
