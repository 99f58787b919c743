#pragma once

#include "recon/adam.hpp"
#include "recon/pipeline.hpp"
#include "recon/sampling.hpp"

namespace recon {

struct TrainConfig {
    double delta = 1.25;
    AdamConfig adam;
    size_t batch_points = 0;  // body points per step, 0 = all
    size_t batch_zeta = 0;    // surface points per step, 0 = all
    long iterations = 500;
    uint64_t seed = 0;
    double depth_loss_weight = 1.0;
    long checkpoint_every = 0;  // 0 = final checkpoint only

    static TrainConfig from_config(const Config& cfg);
    Config to_config() const;
};

// One scene's worth of supervision: the rendered view, the labeled body
// points and the zero-target surface subsample.
struct SceneSample {
    SceneInputs inputs;
    LabeledPointSet body;
    LabeledPointSet surface;
};

struct StepStats {
    long step = 0;
    double loss_sdf = 0;
    double loss_depth = 0;
    double total = 0;
};

// Owns optimizer state across steps; the model is updated in place.
class Trainer {
public:
    Trainer(ReconModel& model, const TrainConfig& cfg);

    // Full forward, both losses, reverse pass, one Adam update.
    // Throws NumericError when the loss goes non-finite.
    StepStats step(const SceneSample& scene);

    long steps_taken() const { return step_; }

private:
    ReconModel& model_;
    TrainConfig cfg_;
    AdamState adam_;
    Rng rng_;
    long step_ = 0;
};

}  // namespace recon
