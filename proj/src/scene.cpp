#include "recon/scene.hpp"

#include <cmath>
#include <filesystem>

#include "recon/errors.hpp"
#include "recon/marching_cubes.hpp"
#include "recon/raster.hpp"
#include "recon/tnsr.hpp"
#include "recon/trimesh.hpp"

namespace recon {

Config camera_to_config(const OrthoCamera& cam) {
    Config cfg;
    const char* axes[4] = {"cam_center", "cam_right", "cam_up", "cam_forward"};
    const Vec3* vecs[4] = {&cam.center, &cam.right, &cam.up, &cam.forward};
    const char* comp[3] = {"_x", "_y", "_z"};
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c)
            cfg.set(std::string(axes[a]) + comp[c], (*vecs[a])[c]);
    cfg.set("cam_pixel_size", cam.pixel_size);
    cfg.set("cam_image_w", cam.image_w);
    cfg.set("cam_image_h", cam.image_h);
    cfg.set("cam_near", cam.near);
    cfg.set("cam_far", cam.far);
    return cfg;
}

OrthoCamera camera_from_config(const Config& cfg) {
    OrthoCamera cam;
    const char* axes[4] = {"cam_center", "cam_right", "cam_up", "cam_forward"};
    Vec3* vecs[4] = {&cam.center, &cam.right, &cam.up, &cam.forward};
    const char* comp[3] = {"_x", "_y", "_z"};
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c)
            (*vecs[a])[c] = cfg.require_double(std::string(axes[a]) + comp[c]);
    cam.pixel_size = cfg.require_double("cam_pixel_size");
    cam.image_w = static_cast<int>(cfg.require_int("cam_image_w"));
    cam.image_h = static_cast<int>(cfg.require_int("cam_image_h"));
    cam.near = cfg.require_double("cam_near");
    cam.far = cfg.require_double("cam_far");
    cam.validate();
    return cam;
}

std::string SceneDescriptor::resolve(const std::string& rel) const {
    if (rel.empty() || rel.front() == '/') return rel;
    return dir.empty() ? rel : dir + "/" + rel;
}

SceneDescriptor SceneDescriptor::load(const std::string& file) {
    Config cfg = Config::load(file);
    SceneDescriptor d;
    size_t slash = file.find_last_of('/');
    d.dir = slash == std::string::npos ? "." : file.substr(0, slash);
    d.mesh_path = cfg.require_string("mesh");
    d.rgb_path = cfg.require_string("rgb");
    d.depth_path = cfg.require_string("depth");
    d.normals_path = cfg.require_string("normals");
    d.mask_path = cfg.require_string("mask");
    d.cloud_path = cfg.get_string("cloud", "");
    d.cam = camera_from_config(cfg);
    d.scale_to_cm = cfg.get_double("scale_to_cm", d.scale_to_cm);
    d.resolution = static_cast<int>(cfg.get_int("resolution", d.resolution));
    return d;
}

void SceneDescriptor::save(const std::string& file) const {
    Config cfg = camera_to_config(cam);
    cfg.set("mesh", mesh_path);
    cfg.set("rgb", rgb_path);
    cfg.set("depth", depth_path);
    cfg.set("normals", normals_path);
    cfg.set("mask", mask_path);
    if (!cloud_path.empty()) cfg.set("cloud", cloud_path);
    cfg.set("scale_to_cm", scale_to_cm);
    cfg.set("resolution", resolution);
    cfg.save(file);
}

void save_scalar_image(const std::string& path, const ScalarImage& img) {
    save_tnsr(path, tnsr_f32({static_cast<uint32_t>(img.height),
                              static_cast<uint32_t>(img.width)},
                             img.data));
}

ScalarImage load_scalar_image(const std::string& path) {
    Tnsr t = load_tnsr(path);
    if (t.dims.size() != 2) throw DataError("expected rank-2 image: " + path);
    ScalarImage img(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
    img.data = t.f;
    return img;
}

void save_vector_image(const std::string& path, const VectorImage& img) {
    save_tnsr(path, tnsr_f32({static_cast<uint32_t>(img.height),
                              static_cast<uint32_t>(img.width),
                              static_cast<uint32_t>(img.channels)},
                             img.data));
}

VectorImage load_vector_image(const std::string& path) {
    Tnsr t = load_tnsr(path);
    if (t.dims.size() != 3) throw DataError("expected rank-3 image: " + path);
    VectorImage img(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]),
                    static_cast<int>(t.dims[2]));
    img.data = t.f;
    return img;
}

void save_mask(const std::string& path, const SemanticMask& mask) {
    save_tnsr(path, tnsr_u8({static_cast<uint32_t>(mask.height),
                             static_cast<uint32_t>(mask.width)},
                            mask.labels));
}

SemanticMask load_mask(const std::string& path) {
    Tnsr t = load_tnsr(path);
    if (t.dims.size() != 2) throw DataError("expected rank-2 mask: " + path);
    SemanticMask mask(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
    mask.labels = t.u;
    return mask;
}

SceneInputs load_scene_inputs(const SceneDescriptor& desc) {
    SceneInputs in;
    in.rgb = load_vector_image(desc.resolve(desc.rgb_path));
    in.normals = load_vector_image(desc.resolve(desc.normals_path));
    in.depth = load_scalar_image(desc.resolve(desc.depth_path));
    in.cam = desc.cam;
    return in;
}

namespace {

struct BodyPart {
    bool is_capsule = false;
    Vec3 a = Vec3::Zero();  // sphere center or capsule endpoint
    Vec3 b = Vec3::Zero();
    double r = 0.1;
    uint8_t label = SemanticMask::none;
    Vec3 color = Vec3(0.7, 0.7, 0.7);

    double sdf(const Vec3& p) const {
        if (!is_capsule) return (p - a).norm() - r;
        Vec3 ab = b - a;
        double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        return (p - (a + t * ab)).norm() - r;
    }
};

std::vector<BodyPart> make_body(uint64_t seed) {
    Rng rng(seed);
    auto jitter = [&](double v) { return v * (1.0 + 0.08 * rng.uniform(-1.0, 1.0)); };

    std::vector<BodyPart> parts;
    auto capsule = [&](Vec3 a, Vec3 b, double r, uint8_t label, Vec3 color) {
        BodyPart p;
        p.is_capsule = true;
        p.a = a;
        p.b = b;
        p.r = jitter(r);
        p.label = label;
        p.color = color;
        parts.push_back(p);
    };
    auto sphere = [&](Vec3 c, double r, uint8_t label, Vec3 color) {
        BodyPart p;
        p.a = c;
        p.r = jitter(r);
        p.label = label;
        p.color = color;
        parts.push_back(p);
    };

    Vec3 torso_col(0.45, 0.5, 0.75), limb_col(0.4, 0.42, 0.5);
    Vec3 skin(0.85, 0.65, 0.55);
    capsule({0, -0.25, 0}, {0, 0.25, 0}, 0.22, SemanticMask::none, torso_col);
    sphere({0, 0.52, 0}, 0.16, SemanticMask::face, skin);
    for (int side : {-1, 1}) {
        double s = side;
        capsule({0.24 * s, 0.2, 0}, {0.52 * s, -0.12, 0}, 0.07, SemanticMask::none,
                limb_col);
        sphere({0.56 * s, -0.2, 0}, 0.085, SemanticMask::hand, skin);
        capsule({0.11 * s, -0.3, 0}, {0.14 * s, -0.78, 0}, 0.09, SemanticMask::none,
                limb_col);
    }
    return parts;
}

double body_sdf(const std::vector<BodyPart>& parts, const Vec3& p) {
    double d = parts[0].sdf(p);
    for (size_t i = 1; i < parts.size(); ++i) d = std::min(d, parts[i].sdf(p));
    return d;
}

int nearest_part(const std::vector<BodyPart>& parts, const Vec3& p) {
    int best = 0;
    double bd = parts[0].sdf(p);
    for (size_t i = 1; i < parts.size(); ++i) {
        double d = parts[i].sdf(p);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

OrthoCamera orbit_camera(int view, int resolution) {
    double angle = view * 2.0 * M_PI / 180.0;  // 2-degree orbit steps
    OrthoCamera cam;
    cam.up = Vec3(0, 1, 0);
    cam.forward = Vec3(std::sin(angle), 0, std::cos(angle));
    cam.right = cam.up.cross(cam.forward);
    cam.center = -1.0 * cam.forward;
    cam.pixel_size = 2.0 / resolution;
    cam.image_w = resolution;
    cam.image_h = resolution;
    cam.near = 0.25;
    cam.far = 1.75;
    return cam;
}

std::string view_suffix(int view) {
    if (view == 0) return "";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_%03d", view);
    return buf;
}

}  // namespace

std::vector<std::string> generate_scene(const std::string& dir,
                                        const SceneGenParams& params) {
    if (params.resolution < 16) throw ArgumentError("generate_scene: resolution too small");
    if (params.views < 1) throw ArgumentError("generate_scene: views must be >= 1");
    if (params.mesh_grid < 8) throw ArgumentError("generate_scene: mesh_grid too small");
    std::filesystem::create_directories(dir);

    std::vector<BodyPart> parts = make_body(params.seed);

    // Ground-truth mesh from the analytic union SDF.
    Vec3 lo(1e30, 1e30, 1e30), hi(-1e30, -1e30, -1e30);
    for (const auto& p : parts) {
        lo = lo.cwiseMin(p.a.cwiseMin(p.b) - Vec3::Constant(p.r));
        hi = hi.cwiseMax(p.a.cwiseMax(p.b) + Vec3::Constant(p.r));
    }
    double margin = 0.1 * (hi - lo).maxCoeff();
    lo -= Vec3::Constant(margin);
    hi += Vec3::Constant(margin);
    ScalarField field;
    field.spec.origin = lo;
    field.spec.spacing = (hi - lo).maxCoeff() / params.mesh_grid;
    for (int a = 0; a < 3; ++a)
        field.spec.dims[a] =
            std::max(2, static_cast<int>(std::ceil((hi[a] - lo[a]) / field.spec.spacing)));
    field.values.resize(field.spec.cell_count());
    const auto& d = field.spec.dims;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i)
                field.at(i, j, k) = body_sdf(parts, field.spec.cell_center(i, j, k));
    TriMesh mesh = marching_cubes(field, 0.0);
    if (mesh.empty()) throw NumericError("generate_scene: empty body mesh");
    save_obj(mesh, dir + "/mesh.obj");

    Vec3 light = Vec3(-0.3, 0.5, -0.8).normalized();

    std::vector<std::string> descriptors;
    for (int view = 0; view < params.views; ++view) {
        OrthoCamera cam = orbit_camera(view, params.resolution);
        RenderBuffers rb = rasterize(mesh, cam);

        int w = cam.image_w, h = cam.image_h;
        VectorImage rgb(w, h, 3, 0.0);
        SemanticMask mask(w, h);
        for (int v = 0; v < h; ++v)
            for (int u = 0; u < w; ++u) {
                if (!rb.depth.valid(u, v)) continue;
                Vec3 p = cam.unproject(u, v, rb.depth.at(u, v));
                const BodyPart& part = parts[nearest_part(parts, p)];
                mask.at(u, v) = part.label;
                const double* n = rb.normals.at(u, v);
                double shade = 0.3 + 0.7 * std::max(0.0, Vec3(n[0], n[1], n[2]).dot(light));
                for (int c = 0; c < 3; ++c) rgb.at(u, v)[c] = part.color[c] * shade;
            }

        std::string sfx = view_suffix(view);
        save_vector_image(dir + "/rgb" + sfx + ".tnsr", rgb);
        save_scalar_image(dir + "/depth" + sfx + ".tnsr", rb.depth);
        save_vector_image(dir + "/normals" + sfx + ".tnsr", rb.normals);
        save_mask(dir + "/mask" + sfx + ".tnsr", mask);
        PointCloud cloud = depth_to_points(rb.depth, cam);
        save_ply(cloud, dir + "/cloud" + sfx + ".ply");

        SceneDescriptor desc;
        desc.dir = dir;
        desc.mesh_path = "mesh.obj";
        desc.rgb_path = "rgb" + sfx + ".tnsr";
        desc.depth_path = "depth" + sfx + ".tnsr";
        desc.normals_path = "normals" + sfx + ".tnsr";
        desc.mask_path = "mask" + sfx + ".tnsr";
        desc.cloud_path = "cloud" + sfx + ".ply";
        desc.cam = cam;
        desc.scale_to_cm = params.scale_to_cm;
        desc.resolution = params.resolution;
        std::string file = dir + "/scene" + sfx + ".txt";
        desc.save(file);
        descriptors.push_back(file);
    }
    return descriptors;
}

}  // namespace recon
