#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>

#include "recon/sdf_oracle.hpp"
#include "recon/trimesh.hpp"

using namespace recon;

namespace {

std::string temp_path(const char* name) {
    return std::string("/tmp/recon_test_") + name;
}

// Dense barycentric grid reference for point-triangle distance.
double grid_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    double best = 1e30;
    const int n = 400;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n - i; ++j) {
            double u = static_cast<double>(i) / n;
            double v = static_cast<double>(j) / n;
            Vec3 q = a + u * (b - a) + v * (c - a);
            best = std::min(best, (p - q).norm());
        }
    return best;
}

bool ray_hits_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                       const Vec3& c, double& t) {
    Vec3 e1 = b - a, e2 = c - a;
    Vec3 h = d.cross(e2);
    double det = e1.dot(h);
    if (std::abs(det) < 1e-14) return false;
    double inv = 1.0 / det;
    Vec3 s = o - a;
    double u = s.dot(h) * inv;
    if (u < 0 || u > 1) return false;
    Vec3 q = s.cross(e1);
    double v = d.dot(q) * inv;
    if (v < 0 || u + v > 1) return false;
    t = e2.dot(q) * inv;
    return t > 0;
}

// Parity of ray crossings; returns -1 when the ray grazes too close to an
// edge to be trusted.
int ray_parity(const TriMesh& mesh, const Vec3& p, const Vec3& dir) {
    int hits = 0;
    for (const auto& f : mesh.triangles) {
        double t;
        const Vec3 &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]],
                   &c = mesh.vertices[f[2]];
        if (ray_hits_triangle(p, dir, a, b, c, t)) {
            // Reject near-edge hits: recompute barycentrics for a margin test.
            Vec3 hit = p + t * dir;
            Vec3 n = (b - a).cross(c - a);
            double area2 = n.norm();
            double w0 = (b - hit).cross(c - hit).norm() / area2;
            double w1 = (c - hit).cross(a - hit).norm() / area2;
            double w2 = (a - hit).cross(b - hit).norm() / area2;
            if (std::min({w0, w1, w2}) < 1e-6 || std::abs(w0 + w1 + w2 - 1) > 1e-6)
                return -1;
            ++hits;
        }
    }
    return hits % 2;
}

}  // namespace

TEST_CASE("obj round trip") {
    TriMesh mesh = make_icosphere(0.8, 2);
    std::string path = temp_path("roundtrip.obj");
    save_obj(mesh, path);
    TriMesh back = load_obj(path);
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.triangles.size() == mesh.triangles.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK((back.vertices[i] - mesh.vertices[i]).norm() < 1e-7);
    CHECK(back.triangles == mesh.triangles);
    std::remove(path.c_str());
}

TEST_CASE("obj loader drops zero-area faces and rejects bad indices") {
    std::string path = temp_path("degenerate.obj");
    FILE* f = fopen(path.c_str(), "w");
    fputs("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 1 2\n", f);
    fclose(f);
    TriMesh mesh = load_obj(path);
    CHECK(mesh.triangles.size() == 1);
    f = fopen(path.c_str(), "w");
    fputs("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", f);
    fclose(f);
    CHECK_THROWS_AS(load_obj(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("ply round trip") {
    PointCloud pc;
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
        pc.points.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    std::string path = temp_path("cloud.ply");
    save_ply(pc, path);
    PointCloud back = load_ply(path);
    REQUIRE(back.size() == pc.size());
    for (size_t i = 0; i < pc.size(); ++i)
        CHECK((back.points[i] - pc.points[i]).norm() < 1e-5);
    std::remove(path.c_str());
}

TEST_CASE("primitives have the expected shape") {
    TriMesh ico = make_icosphere(1.0, 2);
    CHECK(ico.triangles.size() == 20 * 4 * 4);
    for (const Vec3& v : ico.vertices) CHECK(v.norm() == doctest::Approx(1.0));

    TriMesh box = make_box(Vec3(-1, -2, -3), Vec3(1, 2, 3));
    CHECK(box.triangles.size() == 12);
    CHECK(box.surface_area() == doctest::Approx(2 * (2 * 4 + 4 * 6 + 2 * 6)));

    TriMesh cap = make_capsule(0.5, 1.0, 2);
    Vec3 a(0, 0, -1), b(0, 0, 1);
    for (const Vec3& v : cap.vertices) {
        double t = std::clamp((v - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        CHECK((v - (a + t * (b - a))).norm() == doctest::Approx(0.5));
    }
}

TEST_CASE("mesh edges are all shared by two triangles") {
    for (const TriMesh& mesh : {make_icosphere(1.0, 1), make_capsule(0.4, 0.7, 2)}) {
        std::map<std::pair<int, int>, int> edges;
        for (const auto& f : mesh.triangles)
            for (int e = 0; e < 3; ++e) {
                int u = f[e], v = f[(e + 1) % 3];
                edges[{std::min(u, v), std::max(u, v)}]++;
            }
        for (const auto& [edge, count] : edges) CHECK(count == 2);
    }
}

TEST_CASE("surface samples lie on the mesh and follow area weights") {
    TriMesh mesh = make_box(Vec3(0, 0, 0), Vec3(4, 1, 1));
    Rng rng(9);
    std::vector<int> tris;
    std::vector<Vec3> pts = sample_surface(mesh, 20000, rng, &tris);
    REQUIRE(pts.size() == 20000);

    MeshQuery q(mesh);
    double area_big = 0, total = mesh.surface_area();
    size_t on_big = 0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        if (std::abs(mesh.face_normal(t).normalized().y()) > 0.5 ||
            std::abs(mesh.face_normal(t).normalized().z()) > 0.5)
            area_big += mesh.face_area(t);
    for (size_t i = 0; i < pts.size(); ++i) {
        CHECK(q.distance(pts[i]) < 1e-9);
        Vec3 n = mesh.face_normal(tris[i]).normalized();
        if (std::abs(n.y()) > 0.5 || std::abs(n.z()) > 0.5) ++on_big;
    }
    double frac = static_cast<double>(on_big) / pts.size();
    CHECK(frac == doctest::Approx(area_big / total).epsilon(0.03));
}

TEST_CASE("point-triangle distance matches a dense grid reference") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        Vec3 a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        Vec3 b(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        Vec3 c(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        if ((b - a).cross(c - a).norm() < 1e-3) continue;
        Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        double got = point_triangle_distance(p, a, b, c);
        double ref = grid_triangle_distance(p, a, b, c);
        CHECK(got <= ref + 1e-12);
        CHECK(got == doctest::Approx(ref).epsilon(1e-4));
    }
}

TEST_CASE("point-triangle distance closed-form cases") {
    Vec3 a(0, 0, 0), b(2, 0, 0), c(0, 2, 0);
    Vec3 closest;
    CHECK(point_triangle_distance(Vec3(0.5, 0.5, 3), a, b, c, &closest) ==
          doctest::Approx(3.0));
    CHECK((closest - Vec3(0.5, 0.5, 0)).norm() < 1e-12);
    CHECK(point_triangle_distance(Vec3(-1, -1, 0), a, b, c) == doctest::Approx(std::sqrt(2)));
    CHECK(point_triangle_distance(Vec3(3, 3, 0), a, b, c) ==
          doctest::Approx(2 * std::sqrt(2)));
    CHECK_THROWS_AS(point_triangle_distance(Vec3(1, 1, 1), a, a, b), ArgumentError);
}

TEST_CASE("winding number classifies sphere interior") {
    TriMesh ico = make_icosphere(1.0, 2);
    CHECK(winding_number(ico, Vec3(0, 0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(winding_number(ico, Vec3(0.5, 0.2, -0.3)) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(winding_number(ico, Vec3(2, 0, 0)) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(winding_number(ico, Vec3(-1.5, 1.5, 0.2)) == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("winding number agrees with ray parity") {
    TriMesh mesh = make_capsule(0.5, 0.8, 2);
    MeshQuery q(mesh);
    Rng rng(33);
    int checked = 0;
    while (checked < 1000) {
        Vec3 p(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-2.5, 2.5));
        if (q.distance(p) < 1e-3) continue;  // skip points hugging the surface
        Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        int parity = ray_parity(mesh, p, dir);
        if (parity < 0) continue;
        int inside = q.winding(p) > 0.5 ? 1 : 0;
        CHECK(inside == parity);
        ++checked;
    }
}

TEST_CASE("mesh query distance matches brute force") {
    TriMesh mesh = make_capsule(0.4, 0.6, 2);
    MeshQuery q(mesh);
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        double brute = 1e30;
        for (const auto& f : mesh.triangles)
            brute = std::min(brute,
                             point_triangle_distance(p, mesh.vertices[f[0]],
                                                     mesh.vertices[f[1]],
                                                     mesh.vertices[f[2]]));
        CHECK(q.distance(p) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("signed distance tracks the analytic sphere") {
    TriMesh ico = make_icosphere(0.7, 3);
    MeshQuery q(ico);
    Rng rng(55);
    for (int i = 0; i < 1000; ++i) {
        Vec3 p(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
        double analytic = p.norm() - 0.7;
        CHECK(std::abs(q.signed_distance(p) - analytic) < 1e-2);
    }
}

TEST_CASE("signed distance tracks the analytic box") {
    Vec3 lo(-0.4, -0.5, -0.3), hi(0.4, 0.5, 0.3);
    TriMesh box = make_box(lo, hi);
    MeshQuery q(box);
    Rng rng(56);
    Vec3 half = 0.5 * (hi - lo), center = 0.5 * (hi + lo);
    for (int i = 0; i < 1000; ++i) {
        Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        Vec3 d = (p - center).cwiseAbs() - half;
        double analytic = Vec3(d.cwiseMax(0.0)).norm() + std::min(0.0, d.maxCoeff());
        CHECK(std::abs(q.signed_distance(p) - analytic) < 1e-9);
    }
}

TEST_CASE("signed distance tracks the analytic capsule") {
    TriMesh cap = make_capsule(0.45, 0.5, 3);
    MeshQuery q(cap);
    Rng rng(57);
    Vec3 a(0, 0, -0.5), b(0, 0, 0.5);
    for (int i = 0; i < 1000; ++i) {
        Vec3 p(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.6, 1.6));
        double t = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        double analytic = (p - (a + t * (b - a))).norm() - 0.45;
        CHECK(std::abs(q.signed_distance(p) - analytic) < 1e-2);
    }
}
