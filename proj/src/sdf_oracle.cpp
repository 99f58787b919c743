#include "recon/sdf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recon/errors.hpp"

namespace recon {

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, Vec3* closest) {
    // Barycentric region walk (Ericson, Real-Time Collision Detection).
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    if (ab.cross(ac).squaredNorm() == 0.0)
        throw ArgumentError("point_triangle_distance: degenerate triangle");

    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    auto finish = [&](const Vec3& q) {
        if (closest) *closest = q;
        return (p - q).norm();
    };
    if (d1 <= 0 && d2 <= 0) return finish(a);

    Vec3 bp = p - b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return finish(b);

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return finish(a + (d1 / (d1 - d3)) * ab);

    Vec3 cp = p - c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return finish(c);

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return finish(a + (d2 / (d2 - d6)) * ac);

    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return finish(b + w * (c - b));
    }

    double denom = 1.0 / (va + vb + vc);
    return finish(a + ab * (vb * denom) + ac * (vc * denom));
}

namespace {

// Van Oosterom-Strackee signed solid angle of triangle (a,b,c) seen from p.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    Vec3 u = a - p, v = b - p, w = c - p;
    double lu = u.norm(), lv = v.norm(), lw = w.norm();
    double det = u.dot(v.cross(w));
    double denom = lu * lv * lw + u.dot(v) * lw + v.dot(w) * lu + w.dot(u) * lv;
    return 2.0 * std::atan2(det, denom);
}

}  // namespace

double winding_number(const TriMesh& mesh, const Vec3& p) {
    double total = 0;
    for (const auto& t : mesh.triangles)
        total += solid_angle(mesh.vertices[t[0]], mesh.vertices[t[1]],
                             mesh.vertices[t[2]], p);
    return total / (4.0 * M_PI);
}

struct MeshQuery::Impl {
    TriMesh mesh;

    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1;  // children, or leaf range below
        int begin = 0, end = 0;     // triangle index range when leaf
    };
    std::vector<Node> nodes;
    std::vector<int> order;  // triangle indices, leaf-partitioned

    double box_sq_dist(const Node& n, const Vec3& p) const {
        Vec3 d = (n.lo - p).cwiseMax(p - n.hi).cwiseMax(Vec3::Zero());
        return d.squaredNorm();
    }

    int build(std::vector<int>& tris, int begin, int end,
              const std::vector<Vec3>& centers) {
        Node node;
        node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        node.hi = -node.lo;
        for (int i = begin; i < end; ++i) {
            const auto& t = mesh.triangles[tris[i]];
            for (int k = 0; k < 3; ++k) {
                node.lo = node.lo.cwiseMin(mesh.vertices[t[k]]);
                node.hi = node.hi.cwiseMax(mesh.vertices[t[k]]);
            }
        }
        int idx = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= 8) {
            nodes[idx].begin = begin;
            nodes[idx].end = end;
            return idx;
        }
        Vec3 extent = node.hi - node.lo;
        int axis = 0;
        if (extent.y() > extent.x()) axis = 1;
        if (extent.z() > extent[axis]) axis = 2;
        int mid = (begin + end) / 2;
        std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                         [&](int a, int b) {
                             if (centers[a][axis] != centers[b][axis])
                                 return centers[a][axis] < centers[b][axis];
                             return a < b;
                         });
        int l = build(tris, begin, mid, centers);
        int r = build(tris, mid, end, centers);
        nodes[idx].left = l;
        nodes[idx].right = r;
        return idx;
    }

    void query(int node_idx, const Vec3& p, double& best_sq, Vec3& best_pt,
               int& best_tri) const {
        const Node& n = nodes[node_idx];
        if (box_sq_dist(n, p) >= best_sq) return;
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                int t = order[i];
                const auto& f = mesh.triangles[t];
                Vec3 q;
                double d = point_triangle_distance(p, mesh.vertices[f[0]],
                                                   mesh.vertices[f[1]],
                                                   mesh.vertices[f[2]], &q);
                if (d * d < best_sq) {
                    best_sq = d * d;
                    best_pt = q;
                    best_tri = t;
                }
            }
            return;
        }
        double dl = box_sq_dist(nodes[n.left], p);
        double dr = box_sq_dist(nodes[n.right], p);
        if (dl <= dr) {
            query(n.left, p, best_sq, best_pt, best_tri);
            query(n.right, p, best_sq, best_pt, best_tri);
        } else {
            query(n.right, p, best_sq, best_pt, best_tri);
            query(n.left, p, best_sq, best_pt, best_tri);
        }
    }
};

MeshQuery::MeshQuery(const TriMesh& mesh) : impl_(std::make_unique<Impl>()) {
    if (mesh.empty()) throw ArgumentError("MeshQuery: empty mesh");
    impl_->mesh = mesh;
    size_t nt = mesh.triangles.size();
    std::vector<Vec3> centers(nt);
    for (size_t t = 0; t < nt; ++t) {
        const auto& f = mesh.triangles[t];
        centers[t] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
    }
    impl_->order.resize(nt);
    std::iota(impl_->order.begin(), impl_->order.end(), 0);
    impl_->build(impl_->order, 0, static_cast<int>(nt), centers);
}

MeshQuery::~MeshQuery() = default;
MeshQuery::MeshQuery(MeshQuery&&) noexcept = default;
MeshQuery& MeshQuery::operator=(MeshQuery&&) noexcept = default;

const TriMesh& MeshQuery::mesh() const { return impl_->mesh; }

double MeshQuery::distance(const Vec3& p, Vec3* closest, int* triangle) const {
    double best_sq = std::numeric_limits<double>::infinity();
    Vec3 best_pt = Vec3::Zero();
    int best_tri = -1;
    impl_->query(0, p, best_sq, best_pt, best_tri);
    if (closest) *closest = best_pt;
    if (triangle) *triangle = best_tri;
    return std::sqrt(best_sq);
}

double MeshQuery::winding(const Vec3& p) const { return winding_number(impl_->mesh, p); }

double MeshQuery::signed_distance(const Vec3& p) const {
    double d = distance(p);
    if (d <= 1e-9) return d;  // on-surface tie-break: positive
    return winding(p) > 0.5 ? -d : d;
}

double signed_distance(const TriMesh& mesh, const Vec3& p) {
    return MeshQuery(mesh).signed_distance(p);
}

}  // namespace recon
