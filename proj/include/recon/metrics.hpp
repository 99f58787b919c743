#pragma once

#include "recon/camera.hpp"
#include "recon/trimesh.hpp"

namespace recon {

// Symmetric mean point-to-surface distance, area-weighted samples both ways.
double chamfer(const TriMesh& a, const TriMesh& b, size_t n_samples, uint64_t seed);

// One-sided mean distance from samples of recon to the gt surface.
double p2s(const TriMesh& recon, const TriMesh& gt, size_t n_samples, uint64_t seed);

// Renders both normal maps from the camera view and averages ||dn||/2 over
// jointly covered pixels; 1.0 when nothing overlaps.
double normal_reprojection(const TriMesh& recon, const TriMesh& gt,
                           const OrthoCamera& cam, int resolution);

}  // namespace recon
