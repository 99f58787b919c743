#pragma once

#include "recon/field.hpp"
#include "recon/trimesh.hpp"

namespace recon {

// Classic 256-case table extraction of the iso-surface. Vertices are welded
// on shared grid edges; triangles are oriented with normals toward the
// positive side of the field. A field with no sign change yields an empty
// mesh.
TriMesh marching_cubes(const ScalarField& field, double iso = 0.0);

// Feature extraction, grid evaluation and surface extraction in one call.
TriMesh reconstruct(const ReconModel& model, const SceneInputs& scene,
                    const FieldOptions& opts);

}  // namespace recon
