#include "recon/trimesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "recon/errors.hpp"

namespace recon {

double TriMesh::surface_area() const {
    double a = 0;
    for (size_t t = 0; t < triangles.size(); ++t) a += face_area(static_cast<int>(t));
    return a;
}

void TriMesh::bounds(Vec3& lo, Vec3& hi) const {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const Vec3& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
}

Vec3 TriMesh::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const Vec3& v : vertices) c += v;
    return vertices.empty() ? c : Vec3(c / static_cast<double>(vertices.size()));
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open OBJ file: " + path);
    TriMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw DataError("malformed vertex in " + path);
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::array<int, 3> f;
            for (int i = 0; i < 3; ++i) {
                std::string tok;
                if (!(ss >> tok)) throw DataError("non-triangle face in " + path);
                // Accept v, v/t, v/t/n, v//n forms; only the vertex index is used.
                f[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
            }
            std::string extra;
            if (ss >> extra) throw DataError("non-triangle face in " + path);
            for (int idx : f)
                if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
                    throw DataError("face index out of range in " + path);
            mesh.triangles.push_back(f);
        }
    }
    // Drop exactly degenerate faces so downstream distance queries stay valid.
    std::vector<std::array<int, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t)
        if (mesh.face_area(static_cast<int>(t)) > 0) kept.push_back(mesh.triangles[t]);
    mesh.triangles = std::move(kept);
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write OBJ file: " + path);
    for (const Vec3& v : mesh.vertices)
        std::fprintf(f, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    for (const auto& t : mesh.triangles)
        std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    std::fclose(f);
}

PointCloud load_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open PLY file: " + path);
    std::string line;
    size_t count = 0;
    bool header_done = false;
    std::vector<std::string> props;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "element") {
            std::string name;
            ss >> name >> count;
            if (name != "vertex") throw DataError("unsupported PLY element in " + path);
        } else if (tag == "property") {
            std::string type, name;
            ss >> type >> name;
            props.push_back(name);
        } else if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw DataError("only ASCII PLY supported: " + path);
        } else if (tag == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) throw DataError("truncated PLY header in " + path);
    if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z")
        throw DataError("PLY vertex element must start with x y z: " + path);
    PointCloud pc;
    pc.points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated PLY body in " + path);
        std::istringstream ss(line);
        double x, y, z;
        if (!(ss >> x >> y >> z)) throw DataError("malformed PLY vertex in " + path);
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            throw DataError("non-finite PLY vertex in " + path);
        pc.points.emplace_back(x, y, z);
    }
    return pc;
}

void save_ply(const PointCloud& pc, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write PLY file: " + path);
    std::fprintf(f,
                 "ply\nformat ascii 1.0\nelement vertex %zu\n"
                 "property float x\nproperty float y\nproperty float z\nend_header\n",
                 pc.points.size());
    for (const Vec3& p : pc.points)
        std::fprintf(f, "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    std::fclose(f);
}

std::vector<Vec3> sample_surface(const TriMesh& mesh, size_t n, Rng& rng,
                                 std::vector<int>* tri_index) {
    if (mesh.empty()) throw ArgumentError("sample_surface: empty mesh");
    size_t nt = mesh.triangles.size();
    std::vector<double> area(nt);
    double total = 0;
    for (size_t t = 0; t < nt; ++t) {
        area[t] = mesh.face_area(static_cast<int>(t));
        total += area[t];
    }
    if (total <= 0) throw ArgumentError("sample_surface: zero-area mesh");

    // Stratify: deterministic integer allocation proportional to area, then
    // hand out the remainder by largest fractional share.
    std::vector<size_t> quota(nt);
    std::vector<std::pair<double, size_t>> frac(nt);
    size_t assigned = 0;
    for (size_t t = 0; t < nt; ++t) {
        double want = static_cast<double>(n) * area[t] / total;
        quota[t] = static_cast<size_t>(std::floor(want));
        assigned += quota[t];
        frac[t] = {want - std::floor(want), t};
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t i = 0; assigned < n; ++i, ++assigned) quota[frac[i % nt].second]++;

    std::vector<Vec3> out;
    out.reserve(n);
    if (tri_index) tri_index->reserve(n);
    for (size_t t = 0; t < nt; ++t) {
        const auto& f = mesh.triangles[t];
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        for (size_t i = 0; i < quota[t]; ++i) {
            double r1 = std::sqrt(rng.uniform());
            double r2 = rng.uniform();
            out.push_back((1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c);
            if (tri_index) tri_index->push_back(static_cast<int>(t));
        }
    }
    return out;
}

namespace {

// Icosahedron with loop-style midpoint subdivision, projected to the sphere.
void subdivide(std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 m = (verts[a] + verts[b]).normalized();
        verts.push_back(m);
        int idx = static_cast<int>(verts.size()) - 1;
        midpoint[key] = idx;
        return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
        int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
        next.push_back({t[0], ab, ca});
        next.push_back({t[1], bc, ab});
        next.push_back({t[2], ca, bc});
        next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
}

void unit_icosphere(int subdivisions, std::vector<Vec3>& verts,
                    std::vector<std::array<int, 3>>& tris) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    verts = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
             {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
             {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : verts) v.normalize();
    tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int i = 0; i < subdivisions; ++i) subdivide(verts, tris);
}

}  // namespace

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
    TriMesh mesh;
    unit_icosphere(subdivisions, mesh.vertices, mesh.triangles);
    for (Vec3& v : mesh.vertices) v = center + radius * v;
    return mesh;
}

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
    TriMesh mesh;
    for (int i = 0; i < 8; ++i)
        mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                                   i & 4 ? hi.z() : lo.z());
    // Outward-facing quads split into triangles.
    const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                             {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    for (const auto& q : quads) {
        mesh.triangles.push_back({q[0], q[1], q[2]});
        mesh.triangles.push_back({q[0], q[2], q[3]});
    }
    return mesh;
}

TriMesh make_capsule(double radius, double half_len, int subdivisions,
                     const Vec3& center) {
    // Sphere vertices split at the equator and pushed apart along z; equator
    // vertices (z == 0) stay duplicated per cap side only if displaced, so we
    // displace by sign(z) with z == 0 mapped to +.
    TriMesh mesh;
    unit_icosphere(subdivisions, mesh.vertices, mesh.triangles);
    for (Vec3& v : mesh.vertices) {
        double shift = v.z() >= 0 ? half_len : -half_len;
        v = center + Vec3(radius * v.x(), radius * v.y(), radius * v.z() + shift);
    }
    return mesh;
}

}  // namespace recon
