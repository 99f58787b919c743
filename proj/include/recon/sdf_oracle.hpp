#pragma once

#include <memory>

#include "recon/trimesh.hpp"

namespace recon {

// Exact Euclidean distance from p to the closed triangle (a,b,c); also
// reports the closest point.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, Vec3* closest = nullptr);

// Generalized winding number: sum of signed solid angles / 4pi. About 1
// inside and 0 outside for watertight meshes. Brute force over triangles.
double winding_number(const TriMesh& mesh, const Vec3& p);

// Read-only distance/sign queries against an immutable mesh. Closest-triangle
// search goes through a median-split AABB tree; the winding-number sign test
// is exact (every triangle contributes).
class MeshQuery {
public:
    explicit MeshQuery(const TriMesh& mesh);
    ~MeshQuery();
    MeshQuery(MeshQuery&&) noexcept;
    MeshQuery& operator=(MeshQuery&&) noexcept;

    const TriMesh& mesh() const;

    // Unsigned distance to the surface; optionally the closest point/triangle.
    double distance(const Vec3& p, Vec3* closest = nullptr, int* triangle = nullptr) const;

    double winding(const Vec3& p) const;

    // Negative inside (winding > 0.5), positive outside. Points within 1e-9
    // of the surface take the + sign.
    double signed_distance(const Vec3& p) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper; builds a fresh MeshQuery per call.
double signed_distance(const TriMesh& mesh, const Vec3& p);

}  // namespace recon
