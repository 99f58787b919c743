#include "recon/pipeline.hpp"

#include <cmath>

#include "recon/parallel.hpp"

namespace recon {

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Order-invariant per-site unit normal draw keyed by coordinate and channel.
double site_normal(uint64_t seed, const VoxelCoord& c, int channel) {
    uint64_t h = seed;
    h = mix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(c[0])));
    h = mix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(c[1])));
    h = mix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(c[2])));
    h = mix64(h ^ static_cast<uint64_t>(channel));
    uint64_t h2 = mix64(h);
    double u1 = ((h >> 11) + 1) * 0x1.0p-53;
    if (u1 > 1.0) u1 = 1.0;
    double u2 = (h2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Feature maps may run at a coarser pixel stride than the camera image.
double map_pixel_stride(const OrthoCamera& cam, const VectorImage& map) {
    if (map.width <= 0) throw ArgumentError("empty feature map");
    return static_cast<double>(std::lround(static_cast<double>(cam.image_w) / map.width));
}

}  // namespace

SparseVoxelTensor build_sparse(const std::vector<VoxelCoord>& sites,
                               const VectorImage& lr_feature_map, const OrthoCamera& cam,
                               double spacing, const Vec3& origin, bool random_embedding,
                               uint64_t seed,
                               std::vector<std::pair<double, double>>* site_uv) {
    SparseVoxelTensor out = make_sparse_tensor(sites, lr_feature_map.channels, 1);
    double px_stride = map_pixel_stride(cam, lr_feature_map);
    if (site_uv) site_uv->assign(out.site_count(), {0.0, 0.0});
    parallel_chunks(out.site_count(), [&](size_t begin, size_t end, int) {
        for (size_t s = begin; s < end; ++s) {
            const VoxelCoord& c = out.sites[s];
            Vec3 center = origin + spacing * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
            double u, v, z;
            cam.project(center, u, v, z);
            u /= px_stride;
            v /= px_stride;
            if (site_uv) (*site_uv)[s] = {u, v};
            if (random_embedding) {
                for (int ch = 0; ch < out.channels; ++ch)
                    out.feature(s)[ch] = site_normal(seed, c, ch);
            } else {
                bilinear_sample(lr_feature_map, u, v, out.feature(s));
            }
        }
    });
    return out;
}

void forward_features(const ReconModel& model, const SceneInputs& scene,
                      PipelineCache& cache, uint64_t embed_seed) {
    const VectorImage& rgb = scene.rgb;
    const VectorImage& nrm = scene.normals;
    if (rgb.channels != 3 || nrm.channels != 3)
        throw ArgumentError("rgb and normals must have 3 channels");
    if (rgb.width != nrm.width || rgb.height != nrm.height)
        throw ArgumentError("rgb/normals dimension mismatch");
    if (rgb.width != scene.cam.image_w || rgb.height != scene.cam.image_h)
        throw ArgumentError("image/camera dimension mismatch");
    scene.cam.validate();

    cache.cam = scene.cam;
    cache.input6 = VectorImage(rgb.width, rgb.height, 6);
    for (int v = 0; v < rgb.height; ++v)
        for (int u = 0; u < rgb.width; ++u) {
            double* dst = cache.input6.at(u, v);
            const double* cr = rgb.at(u, v);
            const double* cn = nrm.at(u, v);
            for (int k = 0; k < 3; ++k) {
                dst[k] = std::isfinite(cr[k]) ? cr[k] : 0.0;
                dst[3 + k] = std::isfinite(cn[k]) ? cn[k] : 0.0;
            }
        }

    cache.lr_map = fe_forward(cache.input6, model.lr_fe, &cache.lr_acts);
    cache.hr_map = fe_forward(cache.input6, model.hr_fe, &cache.hr_acts);

    PointCloud cloud = depth_to_points(scene.depth, scene.cam);
    if (cloud.empty()) throw ArgumentError("depth map has no valid pixels");

    cache.spacing = model.config.voxel_spacing_norm;
    Vec3 lo = cloud.points[0];
    for (const Vec3& p : cloud.points) lo = lo.cwiseMin(p);
    cache.vox_origin = lo;
    cache.random_embedding = model.config.random_voxel_features;

    std::vector<VoxelCoord> sites = voxelize(cloud, cache.spacing, cache.vox_origin);
    cache.vox = build_sparse(sites, cache.lr_map, scene.cam, cache.spacing,
                             cache.vox_origin, cache.random_embedding, embed_seed,
                             &cache.site_uv);
    cache.codes = vfe_forward(cache.vox, model.vfe, cache.vox_origin, cache.spacing,
                              &cache.vfe_acts);
}

namespace {

// Assembles the MLP input for one point: HR pixel feature, multi-scale codes,
// normalized depth. Reports (u,v) in HR map coordinates for the adjoint.
void assemble_input(const PipelineCache& cache, double hr_stride, const Vec3& p,
                    double* buf, double& u_out, double& v_out) {
    double u, v, z;
    cache.cam.project(p, u, v, z);
    u /= hr_stride;
    v /= hr_stride;
    u_out = u;
    v_out = v;
    int w_hr = cache.hr_map.channels;
    bilinear_sample(cache.hr_map, u, v, buf);
    trilinear_query(cache.codes, p, buf + w_hr);
    buf[w_hr + cache.codes.total_channels()] = cache.cam.normalized_depth(z);
}

}  // namespace

void predict_sdf(const ReconModel& model, const PipelineCache& cache,
                 const std::vector<Vec3>& points, std::vector<double>& out) {
    out.assign(points.size(), 0.0);
    int in_dim = model.mlp.in_dim();
    double hr_stride = map_pixel_stride(cache.cam, cache.hr_map);
    parallel_chunks(points.size(), [&](size_t begin, size_t end, int) {
        std::vector<double> buf(in_dim);
        for (size_t i = begin; i < end; ++i) {
            double u, v;
            assemble_input(cache, hr_stride, points[i], buf.data(), u, v);
            out[i] = mlp_forward(model.mlp, buf.data());
        }
    });
}

void backward_sdf(const ReconModel& model, PipelineCache& cache,
                  const std::vector<Vec3>& points, const std::vector<double>& d_preds,
                  ModelGradients& grads) {
    if (points.size() != d_preds.size())
        throw ArgumentError("backward_sdf: cotangent count mismatch");
    int in_dim = model.mlp.in_dim();
    int w_hr = cache.hr_map.channels;
    double hr_stride = map_pixel_stride(cache.cam, cache.hr_map);

    int workers = worker_count();
    std::vector<VectorImage> d_hr(workers, VectorImage(cache.hr_map.width,
                                                       cache.hr_map.height, w_hr));
    std::vector<std::array<SparseVoxelTensor, 3>> d_levels(workers);
    for (int w = 0; w < workers; ++w)
        for (int l = 0; l < 3; ++l)
            d_levels[w][l] = cache.codes.levels[l].like(cache.codes.levels[l].channels);
    std::vector<MlpGradients> d_mlp(workers, MlpGradients(model.mlp));

    parallel_chunks(points.size(), [&](size_t begin, size_t end, int w) {
        std::vector<double> buf(in_dim), d_buf(in_dim);
        MlpActivations acts;
        for (size_t i = begin; i < end; ++i) {
            if (d_preds[i] == 0.0) continue;
            double u, v;
            assemble_input(cache, hr_stride, points[i], buf.data(), u, v);
            mlp_forward(model.mlp, buf.data(), &acts);
            mlp_backward(model.mlp, acts, d_preds[i], d_buf.data(), d_mlp[w]);
            bilinear_sample_backward(d_hr[w], u, v, d_buf.data());
            trilinear_query_backward(cache.codes, points[i], d_buf.data() + w_hr,
                                     d_levels[w]);
            // d_buf.back() is the depth-input cotangent; depth is data, not a
            // parameter, so it stops here.
        }
    });

    // Fixed-order reductions keep the step deterministic.
    for (int w = 1; w < workers; ++w) {
        for (size_t i = 0; i < d_hr[0].data.size(); ++i)
            d_hr[0].data[i] += d_hr[w].data[i];
        for (int l = 0; l < 3; ++l)
            for (size_t i = 0; i < d_levels[0][l].features.size(); ++i)
                d_levels[0][l].features[i] += d_levels[w][l].features[i];
        for (size_t l = 0; l < d_mlp[0].d_weights.size(); ++l) {
            for (size_t i = 0; i < d_mlp[0].d_weights[l].size(); ++i)
                grads.mlp.d_weights[l][i] += d_mlp[w].d_weights[l][i];
            for (size_t i = 0; i < d_mlp[0].d_biases[l].size(); ++i)
                grads.mlp.d_biases[l][i] += d_mlp[w].d_biases[l][i];
        }
    }
    for (size_t l = 0; l < d_mlp[0].d_weights.size(); ++l) {
        for (size_t i = 0; i < d_mlp[0].d_weights[l].size(); ++i)
            grads.mlp.d_weights[l][i] += d_mlp[0].d_weights[l][i];
        for (size_t i = 0; i < d_mlp[0].d_biases[l].size(); ++i)
            grads.mlp.d_biases[l][i] += d_mlp[0].d_biases[l][i];
    }

    SparseVoxelTensor d_vox =
        vfe_backward(model.vfe, cache.vfe_acts, d_levels[0], grads.vfe);

    fe_backward(model.hr_fe, cache.hr_acts, d_hr[0], grads.hr_fe);

    if (!cache.random_embedding) {
        VectorImage d_lr(cache.lr_map.width, cache.lr_map.height, cache.lr_map.channels);
        for (size_t s = 0; s < d_vox.site_count(); ++s)
            bilinear_sample_backward(d_lr, cache.site_uv[s].first,
                                     cache.site_uv[s].second, d_vox.feature(s));
        fe_backward(model.lr_fe, cache.lr_acts, d_lr, grads.lr_fe);
    }
}

}  // namespace recon
