#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "recon/marching_cubes.hpp"
#include "recon/metrics.hpp"
#include "recon/raster.hpp"
#include "recon/scene.hpp"
#include "recon/sdf_oracle.hpp"

using namespace recon;

namespace {

SceneInputs sphere_scene(int res) {
    OrthoCamera cam;
    cam.pixel_size = 1.0 / res;
    cam.image_w = res;
    cam.image_h = res;
    cam.near = 0.4;
    cam.far = 1.6;

    double r = 0.3;
    ScalarImage depth(res, res, std::nan(""));
    for (int v = 0; v < res; ++v)
        for (int u = 0; u < res; ++u) {
            double x = (u - 0.5 * res) * cam.pixel_size;
            double y = (0.5 * res - v) * cam.pixel_size;
            double d2 = r * r - x * x - y * y;
            if (d2 > 0) depth.at(u, v) = 1.0 - std::sqrt(d2);
        }

    SceneInputs scene;
    scene.cam = cam;
    scene.depth = depth;
    scene.normals = normals_from_depth(depth, cam);
    scene.rgb = VectorImage(res, res, 3);
    for (double& v : scene.rgb.data) v = 0.5;
    return scene;
}

ModelConfig tiny_config() {
    ModelConfig mc;
    mc.w_lr = 4;
    mc.w_hr = 3;
    mc.fe_stacks = 1;
    mc.vfe_base = 2;
    mc.mlp_hidden = {8, 6};
    mc.voxel_spacing_norm = 0.12;
    return mc;
}

ScalarField sphere_field(int n, double radius) {
    ScalarField f;
    f.spec.origin = Vec3(-1, -1, -1);
    f.spec.spacing = 2.0 / n;
    f.spec.dims = {n, n, n};
    f.values.resize(f.spec.cell_count());
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                f.at(i, j, k) = f.spec.cell_center(i, j, k).norm() - radius;
    return f;
}

// Every edge must be used exactly twice, once per direction.
bool closed_manifold(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) edges[{t[e], t[(e + 1) % 3]}] += 1;
    for (const auto& [edge, count] : edges) {
        if (count != 1) return false;
        auto rev = edges.find({edge.second, edge.first});
        if (rev == edges.end() || rev->second != 1) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("evaluate_field matches predict_sdf at cell centers") {
    SceneInputs scene = sphere_scene(24);
    ModelConfig mc = tiny_config();
    ReconModel model(mc);
    init_model(model, 3);

    FieldOptions opts;
    opts.m_resolution = 20;
    opts.seed = 5;
    ScalarField field = evaluate_field(model, scene, opts);

    double total = static_cast<double>(field.spec.cell_count());
    double target = 20.0 * 20.0 * 20.0;
    CHECK(total >= 0.9 * target);
    CHECK(total <= 1.1 * target);

    PipelineCache cache;
    forward_features(model, scene, cache);
    std::vector<Vec3> centers;
    std::vector<size_t> flat;
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        int i = static_cast<int>(rng.uniform_index(field.spec.dims[0]));
        int j = static_cast<int>(rng.uniform_index(field.spec.dims[1]));
        int k = static_cast<int>(rng.uniform_index(field.spec.dims[2]));
        centers.push_back(field.spec.cell_center(i, j, k));
        flat.push_back((static_cast<size_t>(k) * field.spec.dims[1] + j) *
                           field.spec.dims[0] +
                       i);
    }
    std::vector<double> pred;
    predict_sdf(model, cache, centers, pred);
    for (size_t t = 0; t < centers.size(); ++t)
        CHECK(field.values[flat[t]] == doctest::Approx(pred[t]).epsilon(1e-12));

    // Zero mlp: the whole field collapses to zero.
    for (auto& w : model.mlp.weights) std::fill(w.begin(), w.end(), 0.0);
    ScalarField zero = evaluate_field(model, scene, opts);
    for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("marching cubes recovers a sphere") {
    const int n = 64;
    const double r = 0.5;
    ScalarField field = sphere_field(n, r);
    TriMesh mesh = marching_cubes(field, 0.0);

    REQUIRE(!mesh.empty());
    CHECK(closed_manifold(mesh));
    double half_cell = 0.5 * field.spec.spacing;
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.norm() - r) <= half_cell);

    // Outward orientation everywhere on a sphere.
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        Vec3 c = (mesh.vertices[mesh.triangles[t][0]] +
                  mesh.vertices[mesh.triangles[t][1]] +
                  mesh.vertices[mesh.triangles[t][2]]) /
                 3.0;
        CHECK(mesh.face_normal(t).dot(c) > 0.0);
    }
    CHECK(std::abs(winding_number(mesh, Vec3::Zero()) - 1.0) < 0.05);
    CHECK(std::abs(winding_number(mesh, Vec3(0.9, 0.9, 0.9))) < 0.05);

    // Area close to the analytic sphere.
    CHECK(mesh.surface_area() == doctest::Approx(4 * M_PI * r * r).epsilon(0.02));
}

TEST_CASE("marching cubes sign handling") {
    ScalarField field = sphere_field(32, 0.5);

    // Negated field: same surface, flipped orientation.
    ScalarField neg = field;
    for (double& v : neg.values) v = -v;
    TriMesh inward = marching_cubes(neg, 0.0);
    REQUIRE(!inward.empty());
    CHECK(std::abs(winding_number(inward, Vec3::Zero()) + 1.0) < 0.05);

    // No sign change: empty mesh.
    ScalarField pos = field;
    for (double& v : pos.values) v = std::abs(v) + 0.1;
    CHECK(marching_cubes(pos, 0.0).empty());
}

TEST_CASE("marching cubes interpolates linear fields exactly") {
    ScalarField f;
    f.spec.origin = Vec3(0, 0, 0);
    f.spec.spacing = 0.25;
    f.spec.dims = {9, 6, 6};
    f.values.resize(f.spec.cell_count());
    const double iso_x = 1.1;
    for (int k = 0; k < 6; ++k)
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 9; ++i) f.at(i, j, k) = f.spec.cell_center(i, j, k).x() - iso_x;
    TriMesh mesh = marching_cubes(f, 0.0);
    REQUIRE(!mesh.empty());
    for (const Vec3& v : mesh.vertices) CHECK(v.x() == doctest::Approx(iso_x).epsilon(1e-12));
}

TEST_CASE("chamfer and p2s behave on spheres") {
    TriMesh a = make_icosphere(0.5, 3);
    TriMesh b = make_icosphere(0.6, 3);

    CHECK(chamfer(a, a, 4000, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(p2s(a, a, 4000, 1) == doctest::Approx(0.0).epsilon(1e-9));

    double cd = chamfer(a, b, 6000, 2);
    CHECK(cd == doctest::Approx(0.1).epsilon(0.03));
    double ps = p2s(a, b, 6000, 2);
    CHECK(ps == doctest::Approx(0.1).epsilon(0.03));

    // Symmetric up to sampling noise.
    CHECK(std::abs(chamfer(a, b, 6000, 3) - chamfer(b, a, 6000, 3)) < 0.005);
    // Reproducible for a fixed seed.
    CHECK(chamfer(a, b, 2000, 4) == chamfer(a, b, 2000, 4));
}

TEST_CASE("normal reprojection error measures tilt") {
    OrthoCamera cam;
    cam.pixel_size = 2.0 / 64;
    cam.image_w = 64;
    cam.image_h = 64;
    cam.near = 0.1;
    cam.far = 3.0;

    auto tilted_quad = [&](double angle) {
        // A large quad through z = 1, rotated about the y axis.
        TriMesh m;
        double c = std::cos(angle), s = std::sin(angle);
        auto mk = [&](double x, double y) {
            return Vec3(x * c, y, 1.0 + x * s);
        };
        m.vertices = {mk(-2, -2), mk(2, -2), mk(2, 2), mk(-2, 2)};
        m.triangles = {{0, 1, 2}, {0, 2, 3}};
        return m;
    };

    TriMesh flat = tilted_quad(0.0);
    CHECK(normal_reprojection(flat, flat, cam, 64) == doctest::Approx(0.0));

    // Normals 90 degrees apart: ||dn|| = sqrt(2), error sqrt(2)/2.
    TriMesh up45 = tilted_quad(M_PI / 4);
    TriMesh dn45 = tilted_quad(-M_PI / 4);
    CHECK(normal_reprojection(up45, dn45, cam, 64) ==
          doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-6));

    // Disjoint coverage: defined as 1.
    TriMesh far_off = tilted_quad(0.0);
    for (Vec3& v : far_off.vertices) v += Vec3(100, 0, 0);
    CHECK(normal_reprojection(flat, far_off, cam, 64) == 1.0);
}

TEST_CASE("rasterizer depth, coverage and tie-break") {
    OrthoCamera cam;
    cam.pixel_size = 0.1;
    cam.image_w = 20;
    cam.image_h = 20;
    cam.near = 0.1;
    cam.far = 3.0;

    TriMesh m;
    m.vertices = {Vec3(-0.8, -0.8, 1.0), Vec3(0.8, -0.8, 1.0), Vec3(0.0, 0.8, 1.0)};
    m.triangles = {{0, 1, 2}};
    RenderBuffers rb = rasterize(m, cam);

    int hits = 0;
    for (int v = 0; v < 20; ++v)
        for (int u = 0; u < 20; ++u) {
            int idx = v * 20 + u;
            if (rb.tri[idx] >= 0) {
                ++hits;
                CHECK(rb.tri[idx] == 0);
                CHECK(rb.depth.at(u, v) == doctest::Approx(1.0));
                const double* n = rb.normals.at(u, v);
                CHECK((Vec3(n[0], n[1], n[2]) - Vec3(0, 0, -1)).norm() < 1e-12);
            } else {
                CHECK(!std::isfinite(rb.depth.at(u, v)));
            }
        }
    // Half the bounding square of the triangle, roughly.
    CHECK(hits > 80);
    CHECK(hits < 160);

    // A nearer triangle wins; at exactly equal depth the lower index stays.
    TriMesh two = m;
    two.vertices.push_back(Vec3(-0.8, -0.8, 0.8));
    two.vertices.push_back(Vec3(0.8, -0.8, 0.8));
    two.vertices.push_back(Vec3(0.0, 0.8, 0.8));
    two.triangles.push_back({3, 4, 5});
    RenderBuffers near_far = rasterize(two, cam);
    TriMesh dup = m;
    dup.triangles.push_back({0, 1, 2});
    RenderBuffers tied = rasterize(dup, cam);
    for (int idx = 0; idx < 400; ++idx) {
        if (near_far.tri[idx] >= 0) CHECK(near_far.tri[idx] == 1);
        if (tied.tri[idx] >= 0) CHECK(tied.tri[idx] == 0);
    }

    // Out-of-range depth is clipped.
    TriMesh behind = m;
    for (Vec3& v : behind.vertices) v.z() = 5.0;
    RenderBuffers clipped = rasterize(behind, cam);
    for (int idx = 0; idx < 400; ++idx) CHECK(clipped.tri[idx] == -1);
}

TEST_CASE("generated scenes are consistent") {
    std::string dir = (std::filesystem::temp_directory_path() / "recon_scene_test").string();
    std::filesystem::remove_all(dir);

    SceneGenParams params;
    params.resolution = 96;
    params.views = 2;
    params.mesh_grid = 48;
    params.seed = 11;
    auto descriptors = generate_scene(dir, params);
    REQUIRE(descriptors.size() == 2);

    SceneDescriptor d0 = SceneDescriptor::load(descriptors[0]);
    SceneDescriptor d1 = SceneDescriptor::load(descriptors[1]);
    CHECK((d0.cam.center - d1.cam.center).norm() > 1e-6);
    CHECK(d0.scale_to_cm == 100.0);

    TriMesh mesh = load_obj(d0.resolve(d0.mesh_path));
    REQUIRE(!mesh.empty());
    CHECK(closed_manifold(mesh));
    // Torso interior is inside the watertight surface.
    CHECK(std::abs(winding_number(mesh, Vec3(0, 0, 0)) - 1.0) < 0.05);
    CHECK(std::abs(winding_number(mesh, Vec3(0, 2, 2))) < 0.05);

    SemanticMask mask = load_mask(d0.resolve(d0.mask_path));
    int face_px = 0, hand_px = 0;
    for (uint8_t l : mask.labels) {
        face_px += l == SemanticMask::face;
        hand_px += l == SemanticMask::hand;
    }
    CHECK(face_px > 0);
    CHECK(hand_px > 0);

    // Depth pixels back-project onto the surface.
    SceneInputs inputs = load_scene_inputs(d0);
    PointCloud cloud = depth_to_points(inputs.depth, inputs.cam);
    REQUIRE(cloud.size() > 500);
    MeshQuery query(mesh);
    Rng rng(13);
    int ok = 0, checked = 0;
    for (int t = 0; t < 300; ++t) {
        const Vec3& p = cloud.points[rng.uniform_index(cloud.size())];
        ++checked;
        ok += query.distance(p) <= 1.5 * inputs.cam.pixel_size;
    }
    CHECK(ok >= 0.99 * checked);

    // Normals in the render match the analytic mesh normal at the hit.
    RenderBuffers rb = rasterize(mesh, inputs.cam);
    int agree = 0, covered = 0;
    for (int v = 0; v < 96; v += 7)
        for (int u = 0; u < 96; u += 7) {
            int tri = rb.tri[v * 96 + u];
            if (tri < 0) continue;
            ++covered;
            Vec3 n = mesh.face_normal(tri).normalized();
            if (n.dot(inputs.cam.forward) > 0) n = -n;
            const double* r = rb.normals.at(u, v);
            agree += (Vec3(r[0], r[1], r[2]) - n).norm() < 1e-9;
        }
    CHECK(covered > 10);
    CHECK(agree == covered);

    std::filesystem::remove_all(dir);
}

TEST_CASE("baseline sampling counts, labels and bounds") {
    TriMesh mesh = make_icosphere(0.4, 3);
    LabeledPointSet set = sample_baseline(mesh, 2000, 0.05, 0.25, 17);
    REQUIRE(set.size() == 2000);

    MeshQuery query(mesh);
    Rng rng(19);
    for (int t = 0; t < 200; ++t) {
        size_t i = rng.uniform_index(set.size());
        CHECK(set.sdf[i] == doctest::Approx(query.signed_distance(set.points[i])).epsilon(1e-9));
        CHECK(set.tag[i] == static_cast<uint8_t>(PointTag::body));
    }

    // All points stay inside the padded bounding box.
    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    double pad = 0.1 * (hi - lo).maxCoeff();
    double margin = pad + 4 * 0.05;  // uniform pad plus a 4 sigma offset allowance
    for (const Vec3& p : set.points) {
        CHECK((p - lo.cwiseMin(p)).norm() <= (hi - lo).norm() + 2 * margin);
        for (int a = 0; a < 3; ++a) {
            CHECK(p[a] >= lo[a] - margin);
            CHECK(p[a] <= hi[a] + margin);
        }
    }

    // Zero offsets, zero uniform share: every point lies on the surface.
    LabeledPointSet on_surface = sample_baseline(mesh, 500, 0.0, 0.0, 23);
    for (double s : on_surface.sdf) CHECK(std::abs(s) <= 1e-6);

    CHECK_THROWS_AS(sample_baseline(TriMesh{}, 10, 0.1, 0.1, 0), ArgumentError);
    CHECK_THROWS_AS(sample_baseline(mesh, 10, 0.1, 1.5, 0), ArgumentError);
}

TEST_CASE("semantic augmentation densifies masked regions") {
    TriMesh mesh = make_icosphere(0.4, 3, Vec3(0, 0, 1));
    OrthoCamera cam;
    cam.pixel_size = 2.0 / 64;
    cam.image_w = 64;
    cam.image_h = 64;
    cam.near = 0.1;
    cam.far = 2.0;

    LabeledPointSet base = sample_baseline(mesh, 1200, 0.03, 0.1, 29);

    // Empty mask: unchanged.
    SemanticMask empty(64, 64);
    LabeledPointSet same = semantic_augment(base, empty, cam, mesh, 0.01, 2, 31);
    CHECK(same.size() == base.size());

    // Label the upper-left image quadrant as face.
    SemanticMask mask(64, 64);
    for (int v = 0; v < 32; ++v)
        for (int u = 0; u < 32; ++u) mask.at(u, v) = SemanticMask::face;

    // Independent count of the seeds: base points that project into the mask.
    size_t n_seeds = 0;
    for (const Vec3& p : base.points) {
        double u, v, z;
        cam.project(p, u, v, z);
        int iu = static_cast<int>(std::lround(u));
        int iv = static_cast<int>(std::lround(v));
        if (iu >= 0 && iu < 32 && iv >= 0 && iv < 32) ++n_seeds;
    }
    REQUIRE(n_seeds > 0);

    const int n_k = 2;
    LabeledPointSet aug = semantic_augment(base, mask, cam, mesh, 0.01, n_k, 31);
    size_t appended = aug.size() - base.size();
    size_t expect = std::min(n_seeds * ((1u << n_k) - 1), base.size() / 2);
    CHECK(appended == expect);

    // Base points are kept verbatim in front.
    for (size_t i = 0; i < base.size(); ++i) {
        CHECK(aug.points[i] == base.points[i]);
        CHECK(aug.sdf[i] == base.sdf[i]);
        CHECK(aug.tag[i] == base.tag[i]);
    }
    // Appended points carry the region tag and oracle labels.
    MeshQuery query(mesh);
    for (size_t i = base.size(); i < aug.size(); ++i) {
        CHECK(aug.tag[i] == static_cast<uint8_t>(PointTag::face));
        CHECK(aug.sdf[i] ==
              doctest::Approx(query.signed_distance(aug.points[i])).epsilon(1e-9));
    }

    // Densification raises the masked-region share of the point set.
    auto region_frac = [&](const LabeledPointSet& s) {
        size_t in = 0;
        for (const Vec3& p : s.points) {
            double u, v, z;
            cam.project(p, u, v, z);
            if (u < 31.5 && v < 31.5) ++in;
        }
        return static_cast<double>(in) / s.size();
    };
    CHECK(region_frac(aug) > region_frac(base));

    CHECK_THROWS_AS(semantic_augment(base, SemanticMask(8, 8), cam, mesh, 0.01, 2, 0),
                    ArgumentError);
}

TEST_CASE("depth point selection subsamples deterministically") {
    PointCloud pc;
    Rng rng(37);
    for (int i = 0; i < 500; ++i)
        pc.points.push_back(Vec3(rng.uniform(), rng.uniform(), rng.uniform()));

    LabeledPointSet all = select_depth_points(pc, 1000, 1);
    CHECK(all.size() == 500);

    LabeledPointSet sub = select_depth_points(pc, 120, 1);
    REQUIRE(sub.size() == 120);
    for (size_t i = 0; i < sub.size(); ++i) {
        CHECK(sub.sdf[i] == 0.0);
        CHECK(sub.tag[i] == static_cast<uint8_t>(PointTag::depth_surface));
    }
    // Subset of the cloud, unique, reproducible.
    std::set<std::array<double, 3>> cloud_set;
    for (const Vec3& p : pc.points) cloud_set.insert({p.x(), p.y(), p.z()});
    std::set<std::array<double, 3>> chosen;
    for (const Vec3& p : sub.points) {
        CHECK(cloud_set.count({p.x(), p.y(), p.z()}) == 1);
        chosen.insert({p.x(), p.y(), p.z()});
    }
    CHECK(chosen.size() == sub.size());
    LabeledPointSet again = select_depth_points(pc, 120, 1);
    CHECK(again.points == sub.points);
    LabeledPointSet other = select_depth_points(pc, 120, 2);
    CHECK(other.points != sub.points);
}

TEST_CASE("point sets survive a save and load round trip") {
    LabeledPointSet set;
    Rng rng(41);
    for (int i = 0; i < 64; ++i)
        set.append(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                   rng.uniform(-0.5, 0.5), static_cast<PointTag>(i % 4));

    std::string path =
        (std::filesystem::temp_directory_path() / "recon_points_test.pts").string();
    save_point_set(path, set);
    LabeledPointSet back = load_point_set(path);
    std::filesystem::remove(path);

    REQUIRE(back.size() == set.size());
    for (size_t i = 0; i < set.size(); ++i) {
        // Storage is 32-bit floating point.
        CHECK((back.points[i] - set.points[i]).norm() < 1e-6);
        CHECK(std::abs(back.sdf[i] - set.sdf[i]) < 1e-6);
        CHECK(back.tag[i] == set.tag[i]);
    }
}
