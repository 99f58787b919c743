#include "recon/marching_cubes.hpp"

#include <cmath>
#include <unordered_map>

#include "recon/errors.hpp"

namespace recon {

namespace {

#include "mc_tables.inl"

// Cube corner offsets in (di, dj, dk), standard numbering.
const int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// Edge as a pair of corner indices.
const int kEdgeCorner[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

// Central-difference field gradient at a sample point, one-sided at borders.
Vec3 field_gradient(const ScalarField& field, int i, int j, int k) {
    const auto& d = field.spec.dims;
    auto diff = [&](int axis) {
        int c[3] = {i, j, k};
        int lo[3] = {i, j, k}, hi[3] = {i, j, k};
        hi[axis] = std::min(c[axis] + 1, d[axis] - 1);
        lo[axis] = std::max(c[axis] - 1, 0);
        double dv = field.at(hi[0], hi[1], hi[2]) - field.at(lo[0], lo[1], lo[2]);
        int span = hi[axis] - lo[axis];
        return span > 0 ? dv / (span * field.spec.spacing) : 0.0;
    };
    return Vec3(diff(0), diff(1), diff(2));
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, double iso) {
    const auto& dims = field.spec.dims;
    if (field.values.size() != field.spec.cell_count())
        throw ArgumentError("marching_cubes: field size mismatch");
    for (double v : field.values)
        if (!std::isfinite(v)) throw ArgumentError("marching_cubes: non-finite field");

    TriMesh mesh;
    // Welded vertex per (lattice point, axis) edge key.
    std::unordered_map<uint64_t, int> edge_vertex;
    auto edge_key = [&](int i, int j, int k, int axis) {
        return (((static_cast<uint64_t>(i) * (dims[1] + 1) + j) * (dims[2] + 1)) + k) * 3 +
               axis;
    };

    double corner_val[8];
    Vec3 corner_pos[8];
    int vert_of_edge[12];

    for (int k = 0; k + 1 < dims[2]; ++k)
        for (int j = 0; j + 1 < dims[1]; ++j)
            for (int i = 0; i + 1 < dims[0]; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    int ci = i + kCorner[c][0], cj = j + kCorner[c][1],
                        ck = k + kCorner[c][2];
                    corner_val[c] = field.at(ci, cj, ck);
                    corner_pos[c] = field.spec.cell_center(ci, cj, ck);
                    if (corner_val[c] < iso) cube |= 1 << c;
                }
                int edges = kEdgeTable[cube];
                if (edges == 0) continue;

                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    int a = kEdgeCorner[e][0], b = kEdgeCorner[e][1];
                    int ai = i + kCorner[a][0], aj = j + kCorner[a][1],
                        ak = k + kCorner[a][2];
                    int bi = i + kCorner[b][0], bj = j + kCorner[b][1],
                        bk = k + kCorner[b][2];
                    // Canonical key: smaller lattice corner plus the axis.
                    int axis = bi != ai ? 0 : (bj != aj ? 1 : 2);
                    int ki = std::min(ai, bi), kj = std::min(aj, bj), kk = std::min(ak, bk);
                    uint64_t key = edge_key(ki, kj, kk, axis);
                    auto it = edge_vertex.find(key);
                    if (it != edge_vertex.end()) {
                        vert_of_edge[e] = it->second;
                        continue;
                    }
                    double va = corner_val[a], vb = corner_val[b];
                    double t = (va == iso && vb == iso) ? 0.5 : (iso - va) / (vb - va);
                    Vec3 p = corner_pos[a] + t * (corner_pos[b] - corner_pos[a]);
                    int idx = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back(p);
                    edge_vertex.emplace(key, idx);
                    vert_of_edge[e] = idx;
                }

                const int* tri = kTriTable[cube];
                for (int t = 0; tri[t] != -1; t += 3) {
                    std::array<int, 3> f = {vert_of_edge[tri[t]], vert_of_edge[tri[t + 1]],
                                            vert_of_edge[tri[t + 2]]};
                    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
                    mesh.triangles.push_back(f);
                }
            }

    if (mesh.empty()) return mesh;

    // Global flip so normals point toward the positive field side; the table
    // orientation is consistent, so a majority vote over a few faces decides.
    int votes = 0, counted = 0;
    size_t step = std::max<size_t>(1, mesh.triangles.size() / 200);
    for (size_t t = 0; t < mesh.triangles.size(); t += step) {
        Vec3 c = (mesh.vertices[mesh.triangles[t][0]] + mesh.vertices[mesh.triangles[t][1]] +
                  mesh.vertices[mesh.triangles[t][2]]) /
                 3.0;
        Vec3 g = (c - field.spec.origin) / field.spec.spacing - Vec3::Constant(0.5);
        int gi = std::clamp(static_cast<int>(std::lround(g.x())), 0, dims[0] - 1);
        int gj = std::clamp(static_cast<int>(std::lround(g.y())), 0, dims[1] - 1);
        int gk = std::clamp(static_cast<int>(std::lround(g.z())), 0, dims[2] - 1);
        Vec3 grad = field_gradient(field, gi, gj, gk);
        double dot = mesh.face_normal(static_cast<int>(t)).dot(grad);
        if (dot > 0) ++votes;
        if (dot != 0) ++counted;
    }
    if (counted > 0 && votes * 2 < counted)
        for (auto& f : mesh.triangles) std::swap(f[1], f[2]);
    return mesh;
}

TriMesh reconstruct(const ReconModel& model, const SceneInputs& scene,
                    const FieldOptions& opts) {
    ScalarField field = evaluate_field(model, scene, opts);
    return marching_cubes(field, 0.0);
}

}  // namespace recon
