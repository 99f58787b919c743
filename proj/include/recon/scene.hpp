#pragma once

#include <string>

#include "recon/config.hpp"
#include "recon/pipeline.hpp"
#include "recon/sampling.hpp"

namespace recon {

// Structured-text scene description: file references are relative to the
// descriptor's directory.
struct SceneDescriptor {
    std::string dir;
    std::string mesh_path;
    std::string rgb_path;
    std::string depth_path;
    std::string normals_path;
    std::string mask_path;
    std::string cloud_path;
    OrthoCamera cam;
    double scale_to_cm = 100.0;
    int resolution = 512;

    static SceneDescriptor load(const std::string& file);
    void save(const std::string& file) const;

    std::string resolve(const std::string& rel) const;
};

Config camera_to_config(const OrthoCamera& cam);
OrthoCamera camera_from_config(const Config& cfg);

// Image containers <-> TNSR files.
void save_scalar_image(const std::string& path, const ScalarImage& img);
ScalarImage load_scalar_image(const std::string& path);
void save_vector_image(const std::string& path, const VectorImage& img);
VectorImage load_vector_image(const std::string& path);
void save_mask(const std::string& path, const SemanticMask& mask);
SemanticMask load_mask(const std::string& path);

SceneInputs load_scene_inputs(const SceneDescriptor& desc);

// Procedural articulated-capsule body scene.
struct SceneGenParams {
    int resolution = 512;
    int views = 1;        // cameras on a 2-degree orbit
    int mesh_grid = 96;   // marching-cubes grid for the ground-truth mesh
    double scale_to_cm = 100.0;
    uint64_t seed = 0;
};

// Writes mesh.obj, per-view renders (rgb/depth/normals/mask TNSR), cloud.ply
// and descriptors into dir. Returns the descriptor paths.
std::vector<std::string> generate_scene(const std::string& dir,
                                        const SceneGenParams& params);

}  // namespace recon
