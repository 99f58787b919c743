#pragma once

#include <cmath>
#include <vector>

#include "recon/errors.hpp"

namespace recon {

// Dense 2D scalar grid, row-major. NaN marks invalid pixels.
struct ScalarImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ScalarImage() = default;
    ScalarImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int u, int v) { return data[static_cast<size_t>(v) * width + u]; }
    double at(int u, int v) const { return data[static_cast<size_t>(v) * width + u]; }
    bool valid(int u, int v) const { return std::isfinite(at(u, v)); }
    size_t size() const { return data.size(); }
};

// Dense 2D multi-channel grid, row-major, channel-interleaved.
struct VectorImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    VectorImage() = default;
    VectorImage(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double* at(int u, int v) {
        return data.data() + (static_cast<size_t>(v) * width + u) * channels;
    }
    const double* at(int u, int v) const {
        return data.data() + (static_cast<size_t>(v) * width + u) * channels;
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Bilinear blend of the 4 neighbors of (u,v); coordinates clamped to the
// border. Pixel (i,j) lives at continuous coordinates (i,j). Writes
// `channels` values to out.
void bilinear_sample(const VectorImage& img, double u, double v, double* out);

inline std::vector<double> bilinear_sample(const VectorImage& img, double u, double v) {
    std::vector<double> out(img.channels);
    bilinear_sample(img, u, v, out.data());
    return out;
}

// Adjoint of bilinear_sample: scatters the cotangent of the sampled vector
// back into grad (same shape as the sampled image).
void bilinear_sample_backward(VectorImage& grad, double u, double v, const double* d_out);

}  // namespace recon
