#pragma once

#include <Eigen/Dense>

#include "recon/errors.hpp"

namespace recon {

using Vec3 = Eigen::Vector3d;

// Orthographic camera. Pixel (u,v) sits at integer continuous coordinates
// (u,v); v grows downward in the image, `up` points up in world space.
struct OrthoCamera {
    Vec3 center = Vec3::Zero();
    Vec3 right = Vec3::UnitX();
    Vec3 up = Vec3::UnitY();
    Vec3 forward = Vec3::UnitZ();
    double pixel_size = 1.0;
    int image_w = 0;
    int image_h = 0;
    double near = 0.0;
    double far = 1.0;

    void validate() const {
        auto unit = [](const Vec3& v) { return std::abs(v.norm() - 1.0) < 1e-9; };
        if (!unit(right) || !unit(up) || !unit(forward))
            throw ArgumentError("camera axes must be unit length");
        if (std::abs(right.dot(up)) > 1e-9 || std::abs(right.dot(forward)) > 1e-9 ||
            std::abs(up.dot(forward)) > 1e-9)
            throw ArgumentError("camera axes must be orthogonal");
        if (pixel_size <= 0) throw ArgumentError("pixel_size must be positive");
        if (!(near < far)) throw ArgumentError("camera near must be < far");
    }

    // Continuous pixel coordinates plus depth along `forward`.
    void project(const Vec3& p, double& u, double& v, double& z) const {
        Vec3 d = p - center;
        u = d.dot(right) / pixel_size + 0.5 * image_w;
        v = 0.5 * image_h - d.dot(up) / pixel_size;
        z = d.dot(forward);
    }

    // Inverse of project: world point of pixel (u,v) at the given depth.
    Vec3 unproject(double u, double v, double z) const {
        return center + (u - 0.5 * image_w) * pixel_size * right +
               (0.5 * image_h - v) * pixel_size * up + z * forward;
    }

    // Depth normalized to [-1,1] over [near, far]; bounded MLP input.
    double normalized_depth(double z) const {
        return 2.0 * (z - near) / (far - near) - 1.0;
    }
};

inline void orthographic_project(const Vec3& p, const OrthoCamera& cam, double& u,
                                 double& v, double& z) {
    cam.project(p, u, v, z);
}

}  // namespace recon
