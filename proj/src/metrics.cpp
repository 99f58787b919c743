#include "recon/metrics.hpp"

#include <cmath>

#include "recon/errors.hpp"
#include "recon/parallel.hpp"
#include "recon/raster.hpp"
#include "recon/sdf_oracle.hpp"

namespace recon {

namespace {

double mean_surface_distance(const TriMesh& from, const MeshQuery& to, size_t n,
                             Rng& rng) {
    std::vector<Vec3> samples = sample_surface(from, n, rng);
    std::vector<double> dist(samples.size());
    parallel_chunks(samples.size(), [&](size_t begin, size_t end, int) {
        for (size_t i = begin; i < end; ++i) dist[i] = to.distance(samples[i]);
    });
    double sum = 0;
    for (double d : dist) sum += d;
    return samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
}

}  // namespace

double chamfer(const TriMesh& a, const TriMesh& b, size_t n_samples, uint64_t seed) {
    if (a.empty() || b.empty()) throw ArgumentError("chamfer: empty mesh");
    MeshQuery qa(a), qb(b);
    Rng rng_a(seed), rng_b = Rng(seed).fork(1);
    double ab = mean_surface_distance(a, qb, n_samples, rng_a);
    double ba = mean_surface_distance(b, qa, n_samples, rng_b);
    return 0.5 * (ab + ba);
}

double p2s(const TriMesh& recon, const TriMesh& gt, size_t n_samples, uint64_t seed) {
    if (recon.empty() || gt.empty()) throw ArgumentError("p2s: empty mesh");
    MeshQuery q(gt);
    Rng rng(seed);
    return mean_surface_distance(recon, q, n_samples, rng);
}

double normal_reprojection(const TriMesh& recon, const TriMesh& gt,
                           const OrthoCamera& cam, int resolution) {
    if (resolution < 1) throw ArgumentError("normal_reprojection: bad resolution");
    OrthoCamera view = cam;
    // Keep the footprint, change the pixel count.
    view.pixel_size = cam.pixel_size * cam.image_w / static_cast<double>(resolution);
    view.image_w = resolution;
    view.image_h = resolution;

    RenderBuffers ra = rasterize(recon, view);
    RenderBuffers rb = rasterize(gt, view);

    double sum = 0;
    size_t covered = 0;
    for (int v = 0; v < resolution; ++v)
        for (int u = 0; u < resolution; ++u) {
            if (!ra.depth.valid(u, v) || !rb.depth.valid(u, v)) continue;
            const double* na = ra.normals.at(u, v);
            const double* nb = rb.normals.at(u, v);
            double dx = na[0] - nb[0], dy = na[1] - nb[1], dz = na[2] - nb[2];
            sum += 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
            ++covered;
        }
    if (covered == 0) return 1.0;
    return sum / static_cast<double>(covered);
}

}  // namespace recon
