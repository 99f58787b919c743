#include "recon/image.hpp"

#include <algorithm>

namespace recon {

namespace {

struct BilinearTaps {
    int u0, u1, v0, v1;
    double fu, fv;
};

BilinearTaps taps(const VectorImage& img, double u, double v) {
    u = std::clamp(u, 0.0, static_cast<double>(img.width - 1));
    v = std::clamp(v, 0.0, static_cast<double>(img.height - 1));
    BilinearTaps t;
    t.u0 = std::min(static_cast<int>(std::floor(u)), img.width - 2 >= 0 ? img.width - 2 : 0);
    t.v0 = std::min(static_cast<int>(std::floor(v)), img.height - 2 >= 0 ? img.height - 2 : 0);
    t.u0 = std::max(t.u0, 0);
    t.v0 = std::max(t.v0, 0);
    t.u1 = std::min(t.u0 + 1, img.width - 1);
    t.v1 = std::min(t.v0 + 1, img.height - 1);
    t.fu = u - t.u0;
    t.fv = v - t.v0;
    return t;
}

}  // namespace

void bilinear_sample(const VectorImage& img, double u, double v, double* out) {
    if (img.channels < 1) throw ArgumentError("bilinear_sample: image has no channels");
    BilinearTaps t = taps(img, u, v);
    const double* p00 = img.at(t.u0, t.v0);
    const double* p10 = img.at(t.u1, t.v0);
    const double* p01 = img.at(t.u0, t.v1);
    const double* p11 = img.at(t.u1, t.v1);
    double w00 = (1 - t.fu) * (1 - t.fv);
    double w10 = t.fu * (1 - t.fv);
    double w01 = (1 - t.fu) * t.fv;
    double w11 = t.fu * t.fv;
    for (int c = 0; c < img.channels; ++c)
        out[c] = w00 * p00[c] + w10 * p10[c] + w01 * p01[c] + w11 * p11[c];
}

void bilinear_sample_backward(VectorImage& grad, double u, double v, const double* d_out) {
    BilinearTaps t = taps(grad, u, v);
    double* p00 = grad.at(t.u0, t.v0);
    double* p10 = grad.at(t.u1, t.v0);
    double* p01 = grad.at(t.u0, t.v1);
    double* p11 = grad.at(t.u1, t.v1);
    double w00 = (1 - t.fu) * (1 - t.fv);
    double w10 = t.fu * (1 - t.fv);
    double w01 = (1 - t.fu) * t.fv;
    double w11 = t.fu * t.fv;
    for (int c = 0; c < grad.channels; ++c) {
        p00[c] += w00 * d_out[c];
        p10[c] += w10 * d_out[c];
        p01[c] += w01 * d_out[c];
        p11[c] += w11 * d_out[c];
    }
}

}  // namespace recon
