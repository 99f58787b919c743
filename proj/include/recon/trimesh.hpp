#pragma once

#include <array>
#include <string>
#include <vector>

#include "recon/geometry.hpp"

namespace recon {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    bool empty() const { return triangles.empty(); }

    Vec3 face_normal(int t) const {
        const auto& f = triangles[t];
        return (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
    }
    double face_area(int t) const { return 0.5 * face_normal(t).norm(); }
    double surface_area() const;
    void bounds(Vec3& lo, Vec3& hi) const;
    Vec3 centroid() const;
};

// ASCII OBJ, v/f records, 1-based indices, triangles only. Loading drops
// zero-area faces and rejects out-of-range indices.
TriMesh load_obj(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

// ASCII PLY point clouds (element vertex, float x/y/z).
PointCloud load_ply(const std::string& path);
void save_ply(const PointCloud& pc, const std::string& path);

// Area-weighted surface samples, stratified by triangle. Deterministic for a
// fixed rng state. Optionally reports the source triangle of each sample.
std::vector<Vec3> sample_surface(const TriMesh& mesh, size_t n, Rng& rng,
                                 std::vector<int>* tri_index = nullptr);

// Test/scene primitives.
TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriMesh make_box(const Vec3& lo, const Vec3& hi);
// Capsule along +z/-z with hemispherical caps at z = +/- half_len.
TriMesh make_capsule(double radius, double half_len, int subdivisions,
                     const Vec3& center = Vec3::Zero());

}  // namespace recon
