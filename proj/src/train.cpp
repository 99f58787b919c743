#include "recon/train.hpp"

#include <cmath>
#include <numeric>

#include "recon/errors.hpp"
#include "recon/loss.hpp"

namespace recon {

TrainConfig TrainConfig::from_config(const Config& cfg) {
    TrainConfig t;
    t.delta = cfg.get_double("delta", t.delta);
    t.adam.lr = cfg.get_double("lr", t.adam.lr);
    t.adam.beta1 = cfg.get_double("adam_beta1", t.adam.beta1);
    t.adam.beta2 = cfg.get_double("adam_beta2", t.adam.beta2);
    t.adam.eps = cfg.get_double("adam_eps", t.adam.eps);
    t.batch_points = static_cast<size_t>(cfg.get_int("batch_points", 0));
    t.batch_zeta = static_cast<size_t>(cfg.get_int("batch_zeta", 0));
    t.iterations = cfg.get_int("iterations", t.iterations);
    t.seed = static_cast<uint64_t>(cfg.get_int("seed", 0));
    t.depth_loss_weight = cfg.get_double("depth_loss_weight", t.depth_loss_weight);
    t.checkpoint_every = cfg.get_int("checkpoint_every", t.checkpoint_every);
    return t;
}

Config TrainConfig::to_config() const {
    Config cfg;
    cfg.set("delta", delta);
    cfg.set("lr", adam.lr);
    cfg.set("adam_beta1", adam.beta1);
    cfg.set("adam_beta2", adam.beta2);
    cfg.set("adam_eps", adam.eps);
    cfg.set("batch_points", static_cast<long>(batch_points));
    cfg.set("batch_zeta", static_cast<long>(batch_zeta));
    cfg.set("iterations", iterations);
    cfg.set("seed", static_cast<long>(seed));
    cfg.set("depth_loss_weight", depth_loss_weight);
    cfg.set("checkpoint_every", checkpoint_every);
    return cfg;
}

namespace {

std::vector<size_t> tensor_sizes(ReconModel& model) {
    std::vector<size_t> sizes;
    for (const auto& t : param_tensors(model)) sizes.push_back(t.size);
    return sizes;
}

// Draws k distinct indices from [0,n), input order preserved.
std::vector<size_t> draw_indices(size_t n, size_t k, Rng& rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (k == 0 || k >= n) return idx;
    for (size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

Trainer::Trainer(ReconModel& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg), adam_(tensor_sizes(model)), rng_(cfg.seed) {}

StepStats Trainer::step(const SceneSample& scene) {
    ++step_;
    PipelineCache cache;
    forward_features(model_, scene.inputs, cache, cfg_.seed);

    auto body_idx = draw_indices(scene.body.size(), cfg_.batch_points, rng_);
    auto zeta_idx = draw_indices(scene.surface.size(), cfg_.batch_zeta, rng_);

    std::vector<Vec3> body_pts(body_idx.size()), zeta_pts(zeta_idx.size());
    std::vector<double> body_gt(body_idx.size());
    for (size_t i = 0; i < body_idx.size(); ++i) {
        body_pts[i] = scene.body.points[body_idx[i]];
        body_gt[i] = scene.body.sdf[body_idx[i]];
    }
    for (size_t i = 0; i < zeta_idx.size(); ++i)
        zeta_pts[i] = scene.surface.points[zeta_idx[i]];

    std::vector<double> pred_body, pred_zeta;
    predict_sdf(model_, cache, body_pts, pred_body);
    predict_sdf(model_, cache, zeta_pts, pred_zeta);

    StepStats stats;
    stats.step = step_;
    stats.loss_sdf = loss_sdf(pred_body, body_gt, cfg_.delta);
    stats.loss_depth = loss_depth(pred_zeta, cfg_.delta);
    stats.total = stats.loss_sdf + cfg_.depth_loss_weight * stats.loss_depth;
    if (!std::isfinite(stats.total))
        throw NumericError("non-finite loss at step " + std::to_string(step_) +
                           " (sdf=" + std::to_string(stats.loss_sdf) +
                           ", depth=" + std::to_string(stats.loss_depth) + ")");

    ModelGradients grads(model_);
    std::vector<double> d_pred;
    loss_sdf_backward(pred_body, body_gt, cfg_.delta, 1.0, d_pred);
    backward_sdf(model_, cache, body_pts, d_pred, grads);
    if (!zeta_pts.empty() && cfg_.depth_loss_weight != 0.0) {
        loss_depth_backward(pred_zeta, cfg_.delta, cfg_.depth_loss_weight, d_pred);
        backward_sdf(model_, cache, zeta_pts, d_pred, grads);
    }

    std::vector<std::pair<double*, size_t>> params;
    std::vector<std::pair<const double*, size_t>> gradient_views;
    for (const auto& t : param_tensors(model_)) params.emplace_back(t.data, t.size);
    for (const auto& t : grad_tensors(model_, grads))
        gradient_views.emplace_back(t.data, t.size);
    adam_.step(cfg_.adam, params, gradient_views);
    return stats;
}

}  // namespace recon
