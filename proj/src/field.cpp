#include "recon/field.hpp"

#include <cmath>

#include "recon/errors.hpp"

namespace recon {

ScalarField evaluate_field(const ReconModel& model, const SceneInputs& scene,
                           const FieldOptions& opts) {
    if (opts.m_resolution < 2) throw ArgumentError("evaluate_field: M must be >= 2");

    PipelineCache cache;
    forward_features(model, scene, cache, opts.seed);

    PointCloud cloud = depth_to_points(scene.depth, scene.cam);
    double jitter = opts.jitter_sigma >= 0 ? opts.jitter_sigma : 2.0 * cache.spacing;
    double pad = opts.pad;
    if (pad < 0) {
        Vec3 lo = cloud.points[0], hi = cloud.points[0];
        for (const Vec3& p : cloud.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        pad = 0.05 * (hi - lo).maxCoeff();
    }

    ScalarField field;
    field.spec = inference_grid(cloud, opts.m_resolution, jitter, pad, opts.seed);
    field.values.assign(field.spec.cell_count(), 0.0);

    const auto& dims = field.spec.dims;
    size_t total = field.spec.cell_count();
    size_t chunk = opts.chunk == 0 ? total : opts.chunk;
    std::vector<Vec3> pts;
    std::vector<double> vals;
    for (size_t start = 0; start < total; start += chunk) {
        size_t end = std::min(total, start + chunk);
        pts.resize(end - start);
        for (size_t idx = start; idx < end; ++idx) {
            int i = static_cast<int>(idx % dims[0]);
            int j = static_cast<int>((idx / dims[0]) % dims[1]);
            int k = static_cast<int>(idx / (static_cast<size_t>(dims[0]) * dims[1]));
            pts[idx - start] = field.spec.cell_center(i, j, k);
        }
        predict_sdf(model, cache, pts, vals);
        for (size_t idx = start; idx < end; ++idx) {
            double v = vals[idx - start];
            if (!std::isfinite(v))
                throw NumericError("evaluate_field: non-finite field value");
            field.values[idx] = v;
        }
    }
    return field;
}

}  // namespace recon
