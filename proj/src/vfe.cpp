#include "recon/vfe.hpp"

#include <cmath>

#include "recon/errors.hpp"

namespace recon {

namespace {

// Layer topology shared by forward and backward. Layers are numbered 1..28;
// value 0 means the VFE input, -16/-21/-25 mark the three concatenated
// decoder inputs (inverse output / encoder skip).
int producer_of(int layer) {
    switch (layer) {
        case 1: return 0;
        case 17: return -16;
        case 22: return -21;
        case 26: return -25;
        default: return layer - 1;
    }
}

int skip_of_concat(int inv_layer) {
    switch (inv_layer) {
        case 16: return 10;
        case 21: return 6;
        case 25: return 3;
        default: throw StateError("vfe: not a concat layer");
    }
}

ConvMode mode_of(int layer) {
    switch (layer) {
        case 4: case 7: case 11: return ConvMode::strided2;
        case 16: case 21: case 25: return ConvMode::inverse2;
        default: return ConvMode::submanifold;
    }
}

SparseVoxelTensor relu(const SparseVoxelTensor& t) {
    SparseVoxelTensor out = t;
    for (double& v : out.features) v = v > 0 ? v : 0.0;
    return out;
}

SparseVoxelTensor concat_channels(const SparseVoxelTensor& a, const SparseVoxelTensor& b) {
    if (a.sites != b.sites)
        throw StateError("vfe: concat site sets differ");
    SparseVoxelTensor out = a.like(a.channels + b.channels);
    for (size_t s = 0; s < out.site_count(); ++s) {
        double* o = out.feature(s);
        const double* pa = a.feature(s);
        const double* pb = b.feature(s);
        for (int c = 0; c < a.channels; ++c) o[c] = pa[c];
        for (int c = 0; c < b.channels; ++c) o[a.channels + c] = pb[c];
    }
    return out;
}

}  // namespace

VfeParams::VfeParams(int in_ch, int base_width) : in_channels(in_ch), base(base_width) {
    int b = base, b2 = 2 * base, b4 = 4 * base, b8 = 8 * base;
    auto widths = [&](int layer) -> std::pair<int, int> {
        switch (layer) {
            case 1: return {in_channels, b};
            case 2: case 3: return {b, b};
            case 4: return {b, b2};
            case 5: case 6: return {b2, b2};
            case 7: return {b2, b4};
            case 8: case 9: case 10: return {b4, b4};
            case 11: return {b4, b8};
            case 12: case 13: case 14: case 15: return {b8, b8};
            case 16: return {b8, b4};
            case 17: return {b8, b4};  // concat 16/10
            case 18: case 19: case 20: return {b4, b4};
            case 21: return {b4, b2};
            case 22: return {b4, b2};  // concat 21/6
            case 23: case 24: return {b2, b2};
            case 25: return {b2, b};
            case 26: return {b2, b};   // concat 25/3
            case 27: case 28: return {b, b};
            default: throw StateError("vfe: bad layer index");
        }
    };
    layers.reserve(28);
    for (int l = 1; l <= 28; ++l) {
        auto [ci, co] = widths(l);
        layers.emplace_back(ci, co, mode_of(l));
    }
}

CodeVolumes vfe_forward(const SparseVoxelTensor& x, const VfeParams& params,
                        const Vec3& origin, double spacing, VfeActivations* acts) {
    if (params.layers.size() != 28) throw ArgumentError("vfe_forward: bad parameter set");
    if (x.channels != params.in_channels)
        throw ArgumentError("vfe_forward: input channel mismatch");
    if (x.stride != 1) throw ArgumentError("vfe_forward: input stride must be 1");

    VfeActivations local;
    VfeActivations& a = acts ? *acts : local;
    a.tensors.clear();
    a.ctxs.assign(28, SparseConvContext{});
    a.pre.assign(29, nullptr);
    a.post.assign(29, nullptr);
    a.input = &x;

    auto keep = [&](SparseVoxelTensor t) -> const SparseVoxelTensor* {
        a.tensors.push_back(std::move(t));
        return &a.tensors.back();
    };

    const SparseVoxelTensor* concat16 = nullptr;
    const SparseVoxelTensor* concat21 = nullptr;
    const SparseVoxelTensor* concat25 = nullptr;

    for (int l = 1; l <= 28; ++l) {
        const SparseVoxelTensor* in;
        int src = producer_of(l);
        if (src == 0) in = &x;
        else if (src == -16) in = concat16;
        else if (src == -21) in = concat21;
        else if (src == -25) in = concat25;
        else in = a.post[src];

        const std::vector<VoxelCoord>* fine = nullptr;
        if (mode_of(l) == ConvMode::inverse2) fine = &a.post[skip_of_concat(l)]->sites;

        const SparseVoxelTensor* pre =
            keep(sparse_conv_forward(*in, params.layers[l - 1], fine, &a.ctxs[l - 1]));
        a.pre[l] = pre;
        a.post[l] = keep(relu(*pre));

        if (mode_of(l) == ConvMode::inverse2) {
            const SparseVoxelTensor* cat =
                keep(concat_channels(*a.post[l], *a.post[skip_of_concat(l)]));
            if (l == 16) concat16 = cat;
            else if (l == 21) concat21 = cat;
            else concat25 = cat;
        }
    }

    CodeVolumes codes;
    codes.levels[0] = *a.post[28];
    codes.levels[1] = *a.post[24];
    codes.levels[2] = *a.post[20];
    codes.origin = origin;
    codes.spacing = spacing;
    return codes;
}

VfeGradients::VfeGradients(const VfeParams& params) {
    d_weights.reserve(params.layers.size());
    d_bias.reserve(params.layers.size());
    for (const auto& l : params.layers) {
        d_weights.emplace_back(l.weights.size(), 0.0);
        d_bias.emplace_back(l.bias.size(), 0.0);
    }
}

void VfeGradients::accumulate_scaled(const VfeGradients& other, double scale) {
    for (size_t l = 0; l < d_weights.size(); ++l) {
        for (size_t i = 0; i < d_weights[l].size(); ++i)
            d_weights[l][i] += scale * other.d_weights[l][i];
        for (size_t i = 0; i < d_bias[l].size(); ++i)
            d_bias[l][i] += scale * other.d_bias[l][i];
    }
}

SparseVoxelTensor vfe_backward(const VfeParams& params, const VfeActivations& acts,
                               const std::array<SparseVoxelTensor, 3>& d_codes,
                               VfeGradients& grads) {
    // Cotangents of the post-ReLU outputs, accumulated from every consumer.
    std::vector<SparseVoxelTensor> d_post(29);
    auto add_into = [](SparseVoxelTensor& dst, const SparseVoxelTensor& src) {
        if (dst.channels == 0) {
            dst = src;
            return;
        }
        for (size_t i = 0; i < dst.features.size(); ++i) dst.features[i] += src.features[i];
    };
    auto ensure = [&](int l) {
        if (d_post[l].channels == 0) d_post[l] = acts.post[l]->like(acts.post[l]->channels);
    };

    add_into(d_post[28], d_codes[0]);
    add_into(d_post[24], d_codes[1]);
    add_into(d_post[20], d_codes[2]);

    SparseVoxelTensor d_input = acts.input->like(acts.input->channels);

    for (int l = 28; l >= 1; --l) {
        ensure(l);
        // ReLU backward.
        SparseVoxelTensor d_pre = d_post[l];
        const SparseVoxelTensor& pre = *acts.pre[l];
        for (size_t i = 0; i < d_pre.features.size(); ++i)
            if (pre.features[i] <= 0) d_pre.features[i] = 0;

        SparseVoxelTensor dx = sparse_conv_backward(acts.ctxs[l - 1], params.layers[l - 1],
                                                    d_pre, grads.d_weights[l - 1],
                                                    grads.d_bias[l - 1]);
        int src = producer_of(l);
        if (src == 0) {
            add_into(d_input, dx);
        } else if (src < 0) {
            // Concat input: first slice feeds the inverse conv output, the
            // remainder the encoder skip.
            int inv = -src;
            int skip = skip_of_concat(inv);
            int c_inv = acts.post[inv]->channels;
            ensure(inv);
            ensure(skip);
            for (size_t s = 0; s < dx.site_count(); ++s) {
                const double* d = dx.feature(s);
                double* di = d_post[inv].feature(s);
                double* ds = d_post[skip].feature(s);
                for (int c = 0; c < c_inv; ++c) di[c] += d[c];
                for (int c = 0; c < dx.channels - c_inv; ++c) ds[c] += d[c_inv + c];
            }
        } else {
            ensure(src);
            add_into(d_post[src], dx);
        }
    }
    return d_input;
}

namespace {

struct LevelTaps {
    int base[3];
    double frac[3];
};

LevelTaps level_taps(const CodeVolumes& codes, int level, const Vec3& p) {
    int stride = codes.levels[level].stride;
    double cell = codes.spacing * stride;
    LevelTaps t;
    for (int a = 0; a < 3; ++a) {
        double g = (p[a] - codes.origin[a]) / cell - 0.5;
        double fl = std::floor(g);
        t.base[a] = static_cast<int>(fl);
        t.frac[a] = g - fl;
    }
    return t;
}

}  // namespace

void trilinear_query(const CodeVolumes& codes, const Vec3& p, double* out) {
    int offset = 0;
    for (int level = 0; level < 3; ++level) {
        const SparseVoxelTensor& vol = codes.levels[level];
        LevelTaps t = level_taps(codes, level, p);
        for (int c = 0; c < vol.channels; ++c) out[offset + c] = 0;
        for (int corner = 0; corner < 8; ++corner) {
            int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
            double w = (dx ? t.frac[0] : 1 - t.frac[0]) * (dy ? t.frac[1] : 1 - t.frac[1]) *
                       (dz ? t.frac[2] : 1 - t.frac[2]);
            if (w == 0) continue;
            int idx = vol.index.find({static_cast<int32_t>(t.base[0] + dx),
                                      static_cast<int32_t>(t.base[1] + dy),
                                      static_cast<int32_t>(t.base[2] + dz)});
            if (idx < 0) continue;  // absent sites carry zero codes
            const double* f = vol.feature(idx);
            for (int c = 0; c < vol.channels; ++c) out[offset + c] += w * f[c];
        }
        offset += vol.channels;
    }
}

void trilinear_query_backward(const CodeVolumes& codes, const Vec3& p,
                              const double* d_out,
                              std::array<SparseVoxelTensor, 3>& d_levels) {
    int offset = 0;
    for (int level = 0; level < 3; ++level) {
        SparseVoxelTensor& vol = d_levels[level];
        LevelTaps t = level_taps(codes, level, p);
        for (int corner = 0; corner < 8; ++corner) {
            int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
            double w = (dx ? t.frac[0] : 1 - t.frac[0]) * (dy ? t.frac[1] : 1 - t.frac[1]) *
                       (dz ? t.frac[2] : 1 - t.frac[2]);
            if (w == 0) continue;
            int idx = vol.index.find({static_cast<int32_t>(t.base[0] + dx),
                                      static_cast<int32_t>(t.base[1] + dy),
                                      static_cast<int32_t>(t.base[2] + dz)});
            if (idx < 0) continue;
            double* f = vol.feature(idx);
            for (int c = 0; c < vol.channels; ++c) f[c] += w * d_out[offset + c];
        }
        offset += vol.channels;
    }
}

}  // namespace recon
