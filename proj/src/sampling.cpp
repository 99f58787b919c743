#include "recon/sampling.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "recon/errors.hpp"
#include "recon/parallel.hpp"
#include "recon/sdf_oracle.hpp"
#include "recon/tnsr.hpp"

namespace recon {

namespace {

// Oracle-labels points[first..] in place. Parallel but order-stable.
void label_points(const MeshQuery& query, LabeledPointSet& set, size_t first) {
    size_t n = set.size() - first;
    parallel_chunks(n, [&](size_t begin, size_t end, int) {
        for (size_t i = begin; i < end; ++i)
            set.sdf[first + i] = query.signed_distance(set.points[first + i]);
    });
}

}  // namespace

LabeledPointSet sample_baseline(const TriMesh& mesh, size_t x_b, double sigma_lr,
                                double uniform_frac, uint64_t seed) {
    if (mesh.empty()) throw ArgumentError("sample_baseline: empty mesh");
    if (uniform_frac < 0 || uniform_frac > 1)
        throw ArgumentError("sample_baseline: uniform_frac outside [0,1]");

    Rng rng(seed);
    size_t n_uniform = static_cast<size_t>(std::llround(uniform_frac * x_b));
    size_t n_surface = x_b - n_uniform;

    LabeledPointSet set;
    set.points.reserve(x_b);
    set.sdf.reserve(x_b);
    set.tag.reserve(x_b);

    std::vector<Vec3> surf = sample_surface(mesh, n_surface, rng);
    for (Vec3& p : surf) {
        Vec3 offset(rng.normal(0, sigma_lr), rng.normal(0, sigma_lr),
                    rng.normal(0, sigma_lr));
        set.append(p + offset, 0.0, PointTag::body);
    }

    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    double pad = 0.1 * (hi - lo).maxCoeff();
    lo -= Vec3::Constant(pad);
    hi += Vec3::Constant(pad);
    for (size_t i = 0; i < n_uniform; ++i) {
        Vec3 p(lo.x() + rng.uniform() * (hi.x() - lo.x()),
               lo.y() + rng.uniform() * (hi.y() - lo.y()),
               lo.z() + rng.uniform() * (hi.z() - lo.z()));
        set.append(p, 0.0, PointTag::body);
    }

    MeshQuery query(mesh);
    label_points(query, set, 0);
    return set;
}

LabeledPointSet semantic_augment(const LabeledPointSet& base, const SemanticMask& mask,
                                 const OrthoCamera& cam, const TriMesh& mesh,
                                 double sigma_hr, int n_k, uint64_t seed) {
    if (mask.width != cam.image_w || mask.height != cam.image_h)
        throw ArgumentError("semantic_augment: mask/camera dimension mismatch");
    if (n_k < 0) throw ArgumentError("semantic_augment: n_k must be >= 0");

    // Base points landing on masked pixels seed the densification set.
    std::vector<std::pair<Vec3, uint8_t>> cur;
    for (size_t i = 0; i < base.size(); ++i) {
        double u, v, z;
        cam.project(base.points[i], u, v, z);
        int iu = static_cast<int>(std::lround(u));
        int iv = static_cast<int>(std::lround(v));
        if (iu < 0 || iu >= mask.width || iv < 0 || iv >= mask.height) continue;
        uint8_t label = mask.at(iu, iv);
        if (label == SemanticMask::face || label == SemanticMask::hand)
            cur.emplace_back(base.points[i], label);
    }

    LabeledPointSet out = base;
    if (cur.empty() || n_k == 0) return out;

    Rng rng(seed);
    size_t seed_count = cur.size();
    for (int step = 0; step < n_k; ++step) {
        size_t n = cur.size();
        for (size_t i = 0; i < n; ++i) {
            Vec3 p = cur[i].first + Vec3(rng.normal(0, sigma_hr), rng.normal(0, sigma_hr),
                                         rng.normal(0, sigma_hr));
            cur.emplace_back(p, cur[i].second);
        }
    }

    size_t appended = cur.size() - seed_count;
    size_t cap = base.size() / 2;
    if (appended > cap) appended = cap;

    size_t first = out.size();
    for (size_t i = 0; i < appended; ++i) {
        const auto& [p, label] = cur[seed_count + i];
        out.append(p, 0.0,
                   label == SemanticMask::face ? PointTag::face : PointTag::hand);
    }
    MeshQuery query(mesh);
    label_points(query, out, first);
    return out;
}

LabeledPointSet select_depth_points(const PointCloud& pc, size_t n_pc, uint64_t seed) {
    if (pc.empty()) throw ArgumentError("select_depth_points: empty point cloud");
    LabeledPointSet set;
    if (pc.size() <= n_pc) {
        for (const Vec3& p : pc.points) set.append(p, 0.0, PointTag::depth_surface);
        return set;
    }
    // Partial Fisher-Yates, then restore input order among the chosen.
    Rng rng(seed);
    std::vector<size_t> idx(pc.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = 0; i < n_pc; ++i)
        std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    idx.resize(n_pc);
    std::sort(idx.begin(), idx.end());
    for (size_t i : idx) set.append(pc.points[i], 0.0, PointTag::depth_surface);
    return set;
}

void save_point_set(const std::string& path, const LabeledPointSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write point set: " + path);
    uint32_t n = static_cast<uint32_t>(set.size());
    std::vector<double> flat(3ull * n);
    for (size_t i = 0; i < set.size(); ++i)
        for (int k = 0; k < 3; ++k) flat[3 * i + k] = set.points[i][k];
    write_tnsr(out, tnsr_f32({n, 3}, flat));
    write_tnsr(out, tnsr_f32({n}, set.sdf));
    write_tnsr(out, tnsr_u8({n}, set.tag));
    if (!out) throw DataError("point set write failed: " + path);
}

LabeledPointSet load_point_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open point set: " + path);
    Tnsr pts = read_tnsr(in);
    Tnsr sdf = read_tnsr(in);
    Tnsr tag = read_tnsr(in);
    if (pts.dims.size() != 2 || pts.dims[1] != 3)
        throw DataError("point set: bad points shape in " + path);
    size_t n = pts.dims[0];
    if (sdf.element_count() != n || tag.element_count() != n)
        throw DataError("point set: tensor length mismatch in " + path);
    LabeledPointSet set;
    set.points.resize(n);
    for (size_t i = 0; i < n; ++i)
        set.points[i] = Vec3(pts.f[3 * i], pts.f[3 * i + 1], pts.f[3 * i + 2]);
    set.sdf.assign(sdf.f.begin(), sdf.f.end());
    set.tag = tag.u;
    return set;
}

}  // namespace recon
