#pragma once

#include <cstdint>
#include <string>

#include "recon/camera.hpp"
#include "recon/trimesh.hpp"

namespace recon {

enum class PointTag : uint8_t {
    body = 0,
    face = 1,
    hand = 2,
    depth_surface = 3,
};

// Training points with oracle SDF labels and a semantic tag per point.
struct LabeledPointSet {
    std::vector<Vec3> points;
    std::vector<double> sdf;
    std::vector<uint8_t> tag;

    size_t size() const { return points.size(); }
    void append(const Vec3& p, double s, PointTag t) {
        points.push_back(p);
        sdf.push_back(s);
        tag.push_back(static_cast<uint8_t>(t));
    }
};

// Per-pixel semantic labels aligned with the camera image.
struct SemanticMask {
    enum : uint8_t { none = 0, face = 1, hand = 2 };
    int width = 0;
    int height = 0;
    std::vector<uint8_t> labels;

    SemanticMask() = default;
    SemanticMask(int w, int h) : width(w), height(h), labels(static_cast<size_t>(w) * h, 0) {}
    uint8_t& at(int u, int v) { return labels[static_cast<size_t>(v) * width + u]; }
    uint8_t at(int u, int v) const { return labels[static_cast<size_t>(v) * width + u]; }
};

// Body-scale sample mix: area-weighted surface points pushed off the surface
// by isotropic Gaussian offsets, plus a uniform share inside the padded
// bounding box. Every point carries its oracle signed distance.
LabeledPointSet sample_baseline(const TriMesh& mesh, size_t x_b, double sigma_lr,
                                double uniform_frac, uint64_t seed);

// Densifies face/hand regions: base points projecting onto masked pixels are
// duplicated through n_k rounds of set-doubling Gaussian perturbation
// (sigma_hr), capped at half the base count, oracle-labeled and appended.
LabeledPointSet semantic_augment(const LabeledPointSet& base, const SemanticMask& mask,
                                 const OrthoCamera& cam, const TriMesh& mesh,
                                 double sigma_hr, int n_k, uint64_t seed);

// Random subsample of the depth cloud, labeled sdf = 0 (they lie on the
// observed surface by construction).
LabeledPointSet select_depth_points(const PointCloud& pc, size_t n_pc, uint64_t seed);

// Three consecutive TNSR blobs: points Nx3 f32, sdf N f32, tag N u8.
void save_point_set(const std::string& path, const LabeledPointSet& set);
LabeledPointSet load_point_set(const std::string& path);

}  // namespace recon
