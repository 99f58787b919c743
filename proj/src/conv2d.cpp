#include "recon/conv2d.hpp"

#include "recon/errors.hpp"
#include "recon/parallel.hpp"

namespace recon {

namespace {

inline int out_dim(int in, int stride) { return (in - 1) / stride + 1; }

VectorImage relu(const VectorImage& x) {
    VectorImage y = x;
    for (double& v : y.data) v = v > 0 ? v : 0.0;
    return y;
}

// d masked by the sign of the matching pre-activation.
VectorImage relu_backward(const VectorImage& pre, const VectorImage& d) {
    VectorImage out = d;
    for (size_t i = 0; i < out.data.size(); ++i)
        if (pre.data[i] <= 0) out.data[i] = 0;
    return out;
}

VectorImage add(const VectorImage& a, const VectorImage& b) {
    VectorImage out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

}  // namespace

VectorImage conv2d_forward(const VectorImage& x, const Conv2D& layer) {
    if (x.channels != layer.c_in) throw ArgumentError("conv2d: input channel mismatch");
    if (layer.weights.size() != 9ull * layer.c_in * layer.c_out)
        throw ArgumentError("conv2d: weight shape mismatch");
    int W = out_dim(x.width, layer.stride), H = out_dim(x.height, layer.stride);
    VectorImage y(W, H, layer.c_out);
    const int ci = layer.c_in, co = layer.c_out;
    const double* Wt = layer.weights.data();

    parallel_chunks(H, [&](size_t rb, size_t re, int) {
        for (size_t vo = rb; vo < re; ++vo) {
            for (int uo = 0; uo < W; ++uo) {
                double* out = y.at(uo, static_cast<int>(vo));
                for (int c = 0; c < co; ++c) out[c] = layer.bias[c];
                for (int k = 0; k < 9; ++k) {
                    int dy = k / 3 - 1, dx = k % 3 - 1;
                    int vi = static_cast<int>(vo) * layer.stride + dy;
                    int ui = uo * layer.stride + dx;
                    if (vi < 0 || vi >= x.height || ui < 0 || ui >= x.width) continue;
                    const double* in = x.at(ui, vi);
                    const double* Wk = Wt + static_cast<size_t>(k) * ci * co;
                    for (int a = 0; a < ci; ++a) {
                        double xv = in[a];
                        if (xv == 0.0) continue;
                        const double* row = Wk + static_cast<size_t>(a) * co;
                        for (int c = 0; c < co; ++c) out[c] += xv * row[c];
                    }
                }
            }
        }
    });
    return y;
}

VectorImage conv2d_backward(const VectorImage& x, const Conv2D& layer,
                            const VectorImage& d_out, std::vector<double>& d_weights,
                            std::vector<double>& d_bias) {
    const int ci = layer.c_in, co = layer.c_out;
    const double* Wt = layer.weights.data();
    VectorImage dx(x.width, x.height, ci);

    // d_input: gather contributions per input pixel.
    parallel_chunks(x.height, [&](size_t rb, size_t re, int) {
        for (size_t vi = rb; vi < re; ++vi) {
            for (int ui = 0; ui < x.width; ++ui) {
                double* out = dx.at(ui, static_cast<int>(vi));
                for (int k = 0; k < 9; ++k) {
                    int dy = k / 3 - 1, dxo = k % 3 - 1;
                    int vnum = static_cast<int>(vi) - dy;
                    int unum = ui - dxo;
                    if (vnum % layer.stride != 0 || unum % layer.stride != 0) continue;
                    int vo = vnum / layer.stride, uo = unum / layer.stride;
                    if (vo < 0 || vo >= d_out.height || uo < 0 || uo >= d_out.width) continue;
                    const double* dy_px = d_out.at(uo, vo);
                    const double* Wk = Wt + static_cast<size_t>(k) * ci * co;
                    for (int a = 0; a < ci; ++a) {
                        const double* row = Wk + static_cast<size_t>(a) * co;
                        double acc = 0;
                        for (int c = 0; c < co; ++c) acc += row[c] * dy_px[c];
                        out[a] += acc;
                    }
                }
            }
        }
    });

    // d_weights: offsets are independent accumulators.
    parallel_for(9, [&](size_t k) {
        int dy = static_cast<int>(k) / 3 - 1, dxo = static_cast<int>(k) % 3 - 1;
        double* dWk = d_weights.data() + k * ci * co;
        for (int vo = 0; vo < d_out.height; ++vo) {
            int vi = vo * layer.stride + dy;
            if (vi < 0 || vi >= x.height) continue;
            for (int uo = 0; uo < d_out.width; ++uo) {
                int ui = uo * layer.stride + dxo;
                if (ui < 0 || ui >= x.width) continue;
                const double* in = x.at(ui, vi);
                const double* dy_px = d_out.at(uo, vo);
                for (int a = 0; a < ci; ++a) {
                    double xv = in[a];
                    if (xv == 0.0) continue;
                    double* row = dWk + static_cast<size_t>(a) * co;
                    for (int c = 0; c < co; ++c) row[c] += xv * dy_px[c];
                }
            }
        }
    });

    for (int vo = 0; vo < d_out.height; ++vo)
        for (int uo = 0; uo < d_out.width; ++uo) {
            const double* dy_px = d_out.at(uo, vo);
            for (int c = 0; c < co; ++c) d_bias[c] += dy_px[c];
        }
    return dx;
}

VectorImage upsample2x(const VectorImage& x, int out_w, int out_h) {
    VectorImage y(out_w, out_h, x.channels);
    for (int v = 0; v < out_h; ++v)
        for (int u = 0; u < out_w; ++u) {
            const double* in = x.at(std::min(u / 2, x.width - 1), std::min(v / 2, x.height - 1));
            double* out = y.at(u, v);
            for (int c = 0; c < x.channels; ++c) out[c] = in[c];
        }
    return y;
}

VectorImage upsample2x_backward(const VectorImage& d_out, int in_w, int in_h) {
    VectorImage dx(in_w, in_h, d_out.channels);
    for (int v = 0; v < d_out.height; ++v)
        for (int u = 0; u < d_out.width; ++u) {
            const double* d = d_out.at(u, v);
            double* out = dx.at(std::min(u / 2, in_w - 1), std::min(v / 2, in_h - 1));
            for (int c = 0; c < d_out.channels; ++c) out[c] += d[c];
        }
    return dx;
}

FeatureExtractorParams::FeatureExtractorParams(int in_ch, int width_, int out_stride_,
                                               int stacks_)
    : in_channels(in_ch), width(width_), out_stride(out_stride_), stacks(stacks_) {
    layers.emplace_back(in_channels, width, out_stride);  // stem
    for (int s = 0; s < stacks; ++s) {
        layers.emplace_back(width, width, 2);  // down
        layers.emplace_back(width, width, 1);  // mid
        layers.emplace_back(width, width, 1);  // up (after nearest upsample)
    }
}

FeGradients::FeGradients(const FeatureExtractorParams& params) {
    for (const auto& l : params.layers) {
        d_weights.emplace_back(l.weights.size(), 0.0);
        d_bias.emplace_back(l.bias.size(), 0.0);
    }
}

// saved layout: [x, pre_stem, post_stem] then per stack
// [pre_d, d1, pre_m, d2, up, sum, post].
VectorImage fe_forward(const VectorImage& x, const FeatureExtractorParams& params,
                       FeActivations* acts) {
    FeActivations local;
    FeActivations& a = acts ? *acts : local;
    a.saved.clear();

    a.saved.push_back(x);
    VectorImage pre = conv2d_forward(x, params.layers[0]);
    a.saved.push_back(pre);
    VectorImage h = relu(pre);
    a.saved.push_back(h);

    for (int s = 0; s < params.stacks; ++s) {
        const VectorImage& stack_in = a.saved.back();
        const Conv2D& down = params.layers[1 + 3 * s];
        const Conv2D& mid = params.layers[2 + 3 * s];
        const Conv2D& upc = params.layers[3 + 3 * s];

        VectorImage pre_d = conv2d_forward(stack_in, down);
        VectorImage d1 = relu(pre_d);
        VectorImage pre_m = conv2d_forward(d1, mid);
        VectorImage d2 = relu(pre_m);
        VectorImage up = upsample2x(d2, stack_in.width, stack_in.height);
        VectorImage sum = add(conv2d_forward(up, upc), stack_in);
        VectorImage post = relu(sum);

        a.saved.push_back(std::move(pre_d));
        a.saved.push_back(std::move(d1));
        a.saved.push_back(std::move(pre_m));
        a.saved.push_back(std::move(d2));
        a.saved.push_back(std::move(up));
        a.saved.push_back(std::move(sum));
        a.saved.push_back(std::move(post));
    }
    return a.saved.back();
}

VectorImage fe_backward(const FeatureExtractorParams& params, const FeActivations& acts,
                        const VectorImage& d_out, FeGradients& grads) {
    VectorImage d_post = d_out;
    for (int s = params.stacks - 1; s >= 0; --s) {
        size_t base = 3 + static_cast<size_t>(s) * 7;
        const VectorImage& stack_in = s == 0 ? acts.saved[2] : acts.saved[base - 1];
        const VectorImage& pre_d = acts.saved[base + 0];
        const VectorImage& d1 = acts.saved[base + 1];
        const VectorImage& pre_m = acts.saved[base + 2];
        const VectorImage& d2 = acts.saved[base + 3];
        const VectorImage& up = acts.saved[base + 4];
        const VectorImage& sum = acts.saved[base + 5];

        VectorImage d_sum = relu_backward(sum, d_post);
        VectorImage d_up = conv2d_backward(up, params.layers[3 + 3 * s], d_sum,
                                           grads.d_weights[3 + 3 * s], grads.d_bias[3 + 3 * s]);
        VectorImage d_d2 = upsample2x_backward(d_up, d2.width, d2.height);
        VectorImage d_pre_m = relu_backward(pre_m, d_d2);
        VectorImage d_d1 = conv2d_backward(d1, params.layers[2 + 3 * s], d_pre_m,
                                           grads.d_weights[2 + 3 * s], grads.d_bias[2 + 3 * s]);
        VectorImage d_pre_d = relu_backward(pre_d, d_d1);
        VectorImage d_in = conv2d_backward(stack_in, params.layers[1 + 3 * s], d_pre_d,
                                           grads.d_weights[1 + 3 * s], grads.d_bias[1 + 3 * s]);
        d_post = add(d_in, d_sum);  // skip addition
    }
    VectorImage d_pre_stem = relu_backward(acts.saved[1], d_post);
    return conv2d_backward(acts.saved[0], params.layers[0], d_pre_stem, grads.d_weights[0],
                           grads.d_bias[0]);
}

}  // namespace recon
