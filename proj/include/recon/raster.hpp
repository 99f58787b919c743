#pragma once

#include "recon/camera.hpp"
#include "recon/image.hpp"
#include "recon/trimesh.hpp"

namespace recon {

// Orthographic z-buffer render. depth holds camera-forward distance (NaN
// where nothing is hit); normals holds the camera-facing unit face normal
// per pixel (flat shading); tri holds the triangle index per pixel (-1 miss).
struct RenderBuffers {
    ScalarImage depth;
    VectorImage normals;
    std::vector<int> tri;
};

RenderBuffers rasterize(const TriMesh& mesh, const OrthoCamera& cam);

}  // namespace recon
