#include "recon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace recon {

PointCloud depth_to_points(const ScalarImage& depth, const OrthoCamera& cam) {
    if (depth.width != cam.image_w || depth.height != cam.image_h)
        throw ArgumentError("depth_to_points: depth dims do not match camera dims");
    PointCloud pc;
    pc.points.reserve(depth.size());
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            double d = depth.at(u, v);
            if (!std::isfinite(d) || d < cam.near || d > cam.far) continue;
            pc.points.push_back(cam.unproject(u, v, d));
        }
    }
    return pc;
}

VectorImage normals_from_depth(const ScalarImage& depth, const OrthoCamera& cam) {
    if (depth.width != cam.image_w || depth.height != cam.image_h)
        throw ArgumentError("normals_from_depth: depth dims do not match camera dims");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    VectorImage out(depth.width, depth.height, 3, nan);

    auto point_at = [&](int u, int v, Vec3& p) -> bool {
        double d = depth.at(u, v);
        if (!std::isfinite(d)) return false;
        p = cam.unproject(u, v, d);
        return true;
    };

    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (!depth.valid(u, v)) continue;
            int ua = u > 0 ? u - 1 : u;
            int ub = u < depth.width - 1 ? u + 1 : u;
            int va = v > 0 ? v - 1 : v;
            int vb = v < depth.height - 1 ? v + 1 : v;
            if (ua == ub || va == vb) continue;
            Vec3 pa, pb, pc_, pd;
            if (!point_at(ua, v, pa) || !point_at(ub, v, pb) ||
                !point_at(u, va, pc_) || !point_at(u, vb, pd))
                continue;
            Vec3 du = pb - pa;
            Vec3 dv = pd - pc_;
            Vec3 n = du.cross(dv);
            double len = n.norm();
            if (len < 1e-15) continue;
            n /= len;
            if (n.dot(-cam.forward) < 0) n = -n;
            double* px = out.at(u, v);
            px[0] = n.x();
            px[1] = n.y();
            px[2] = n.z();
        }
    }
    return out;
}

std::vector<VoxelCoord> voxelize(const PointCloud& pc, double spacing,
                                 const Vec3& origin) {
    if (spacing <= 0) throw ArgumentError("voxelize: spacing must be positive");
    std::vector<VoxelCoord> sites;
    sites.reserve(pc.size());
    for (const Vec3& p : pc.points) {
        sites.push_back({static_cast<int32_t>(std::floor((p.x() - origin.x()) / spacing)),
                         static_cast<int32_t>(std::floor((p.y() - origin.y()) / spacing)),
                         static_cast<int32_t>(std::floor((p.z() - origin.z()) / spacing))});
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    return sites;
}

GridSpec inference_grid(const PointCloud& pc, int M, double jitter_sigma,
                        double pad, uint64_t seed) {
    if (pc.empty()) throw ArgumentError("inference_grid: empty point cloud");
    if (M < 2) throw ArgumentError("inference_grid: M must be >= 2");

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    auto grow = [&](const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    };
    for (const Vec3& p : pc.points) grow(p);
    if (jitter_sigma > 0) {
        Rng rng(seed);
        for (const Vec3& p : pc.points)
            grow(p + Vec3(rng.normal(0, jitter_sigma), rng.normal(0, jitter_sigma),
                          rng.normal(0, jitter_sigma)));
    }
    lo -= Vec3::Constant(pad);
    hi += Vec3::Constant(pad);

    Vec3 extent = hi - lo;
    if (extent.minCoeff() <= 0)
        throw ArgumentError("inference_grid: degenerate bounding box");

    double L = extent.x() * extent.y() * extent.z();
    double m = std::cbrt(static_cast<double>(M) * M * M / L);
    GridSpec spec;
    spec.spacing = 1.0 / m;
    for (int a = 0; a < 3; ++a) {
        spec.dims[a] = std::max(2, static_cast<int>(std::lround(m * extent[a])));
        // Center the (slightly rounded) grid span on the box.
        spec.origin[a] = lo[a] - 0.5 * (spec.dims[a] * spec.spacing - extent[a]);
    }
    return spec;
}

}  // namespace recon
