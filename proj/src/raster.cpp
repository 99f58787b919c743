#include "recon/raster.hpp"

#include <cmath>
#include <limits>

#include "recon/parallel.hpp"

namespace recon {

RenderBuffers rasterize(const TriMesh& mesh, const OrthoCamera& cam) {
    cam.validate();
    int w = cam.image_w, h = cam.image_h;
    RenderBuffers out;
    out.depth = ScalarImage(w, h, std::numeric_limits<double>::quiet_NaN());
    out.normals = VectorImage(w, h, 3, std::numeric_limits<double>::quiet_NaN());
    out.tri.assign(static_cast<size_t>(w) * h, -1);
    if (mesh.empty()) return out;

    size_t nt = mesh.triangles.size();
    std::vector<std::array<double, 3>> pu(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        double u, v, z;
        cam.project(mesh.vertices[i], u, v, z);
        pu[i] = {u, v, z};
    }

    // Bin triangles by pixel row; rows render independently, so the z-buffer
    // needs no locking and ties resolve by triangle index.
    std::vector<std::vector<int>> rows(h);
    for (size_t t = 0; t < nt; ++t) {
        const auto& f = mesh.triangles[t];
        double vmin = std::min({pu[f[0]][1], pu[f[1]][1], pu[f[2]][1]});
        double vmax = std::max({pu[f[0]][1], pu[f[1]][1], pu[f[2]][1]});
        int r0 = std::max(0, static_cast<int>(std::ceil(vmin)));
        int r1 = std::min(h - 1, static_cast<int>(std::floor(vmax)));
        for (int r = r0; r <= r1; ++r) rows[r].push_back(static_cast<int>(t));
    }

    parallel_chunks(static_cast<size_t>(h), [&](size_t rb, size_t re, int) {
        for (size_t r = rb; r < re; ++r) {
            for (int t : rows[r]) {
                const auto& f = mesh.triangles[t];
                const auto& a = pu[f[0]];
                const auto& b = pu[f[1]];
                const auto& c = pu[f[2]];
                double umin = std::min({a[0], b[0], c[0]});
                double umax = std::max({a[0], b[0], c[0]});
                int u0 = std::max(0, static_cast<int>(std::ceil(umin)));
                int u1 = std::min(w - 1, static_cast<int>(std::floor(umax)));
                double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                if (det == 0) continue;
                for (int u = u0; u <= u1; ++u) {
                    double px = u, py = static_cast<double>(r);
                    double w1 = ((px - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (py - a[1])) /
                                det;
                    double w2 = ((b[0] - a[0]) * (py - a[1]) - (px - a[0]) * (b[1] - a[1])) /
                                det;
                    double w0 = 1.0 - w1 - w2;
                    const double eps = -1e-12;
                    if (w0 < eps || w1 < eps || w2 < eps) continue;
                    double z = w0 * a[2] + w1 * b[2] + w2 * c[2];
                    if (z < cam.near || z > cam.far) continue;
                    double cur = out.depth.at(u, static_cast<int>(r));
                    if (std::isfinite(cur) && cur <= z) continue;
                    out.depth.at(u, static_cast<int>(r)) = z;
                    out.tri[r * static_cast<size_t>(w) + u] = t;
                    Vec3 n = mesh.face_normal(t);
                    double len = n.norm();
                    if (len > 0) n /= len;
                    if (n.dot(cam.forward) > 0) n = -n;
                    double* np = out.normals.at(u, static_cast<int>(r));
                    np[0] = n.x();
                    np[1] = n.y();
                    np[2] = n.z();
                }
            }
        }
    });
    return out;
}

}  // namespace recon
