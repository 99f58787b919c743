#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "recon/camera.hpp"
#include "recon/image.hpp"
#include "recon/rng.hpp"

namespace recon {

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // optional; empty or same length as points

    bool empty() const { return points.empty(); }
    size_t size() const { return points.size(); }
};

// Axis-aligned evaluation grid. Cell (i,j,k) has its center at
// origin + spacing * (i+0.5, j+0.5, k+0.5).
struct GridSpec {
    Vec3 origin = Vec3::Zero();
    double spacing = 1.0;
    std::array<int, 3> dims = {0, 0, 0};

    size_t cell_count() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    }
    Vec3 cell_center(int i, int j, int k) const {
        return origin + spacing * Vec3(i + 0.5, j + 0.5, k + 0.5);
    }
};

using VoxelCoord = std::array<int32_t, 3>;

// One point per valid (finite, within [near,far]) depth pixel, back-projected
// through the orthographic camera.
PointCloud depth_to_points(const ScalarImage& depth, const OrthoCamera& cam);

// Per-pixel surface normal from back-projected neighbor differences
// (central differences interior, one-sided at the borders), oriented to face
// the camera. NaN wherever a participating depth pixel is invalid.
VectorImage normals_from_depth(const ScalarImage& depth, const OrthoCamera& cam);

// Integer cells floor((p - origin)/spacing), deduplicated, lexicographically
// sorted.
std::vector<VoxelCoord> voxelize(const PointCloud& pc, double spacing,
                                 const Vec3& origin);

// Bounding box of the cloud plus Gaussian-jittered copies, padded, resolved
// so the total cell count tracks M^3 with isotropic spacing.
GridSpec inference_grid(const PointCloud& pc, int M, double jitter_sigma,
                        double pad, uint64_t seed);

}  // namespace recon
