#include "recon/sparse_conv.hpp"

#include <algorithm>

#include "recon/errors.hpp"
#include "recon/parallel.hpp"

namespace recon {

namespace {

// CSR adjacency keyed by one endpoint of the rulebook pairs: entry = (offset
// index, other endpoint). Keeping each row's entries in (k, idx) order makes
// the summation order fixed, so evaluation is thread-count independent per
// element.
struct Adjacency {
    std::vector<int> ptr;
    std::vector<std::pair<int, int>> entries;  // (kernel offset, other site)
};

Adjacency group_by(const ConvRulebook& rb, bool by_output, size_t n_rows) {
    Adjacency adj;
    adj.ptr.assign(n_rows + 1, 0);
    size_t total = 0;
    for (const auto& pk : rb.pairs) total += pk.size();
    for (int k = 0; k < 27; ++k)
        for (const auto& [i, o] : rb.pairs[k]) adj.ptr[(by_output ? o : i) + 1]++;
    for (size_t r = 0; r < n_rows; ++r) adj.ptr[r + 1] += adj.ptr[r];
    adj.entries.resize(total);
    std::vector<int> cursor(adj.ptr.begin(), adj.ptr.end() - 1);
    for (int k = 0; k < 27; ++k)
        for (const auto& [i, o] : rb.pairs[k]) {
            int row = by_output ? o : i;
            adj.entries[cursor[row]++] = {k, by_output ? i : o};
        }
    return adj;
}

}  // namespace

SparseVoxelTensor sparse_conv_forward(const SparseVoxelTensor& x, const SparseConv& layer,
                                      const std::vector<VoxelCoord>* target_fine_sites,
                                      SparseConvContext* ctx) {
    if (x.channels != layer.c_in)
        throw ArgumentError("sparse_conv: input channel mismatch");
    if (layer.weights.size() != 27ull * layer.c_in * layer.c_out ||
        layer.bias.size() != static_cast<size_t>(layer.c_out))
        throw ArgumentError("sparse_conv: weight shape mismatch");
    if (layer.mode == ConvMode::inverse2 && target_fine_sites == nullptr)
        throw StateError("sparse_conv: inverse2 without a recorded target site set");

    std::vector<VoxelCoord> out_sites = layer.mode == ConvMode::inverse2
                                            ? *target_fine_sites
                                            : conv_output_sites(x.sites, layer.mode);
    int out_stride = x.stride;
    if (layer.mode == ConvMode::strided2) out_stride *= 2;
    if (layer.mode == ConvMode::inverse2) {
        if (x.stride % 2 != 0) throw ArgumentError("sparse_conv: inverse2 at stride 1");
        out_stride /= 2;
    }

    SparseVoxelTensor y(std::move(out_sites), layer.c_out, out_stride);
    ConvRulebook rb = build_rulebook(x, y.sites, y.index, layer.mode);
    Adjacency gather = group_by(rb, /*by_output=*/true, y.site_count());

    const int ci = layer.c_in, co = layer.c_out;
    const double* W = layer.weights.data();
    parallel_chunks(y.site_count(), [&](size_t b, size_t e, int) {
        for (size_t o = b; o < e; ++o) {
            double* out = y.feature(o);
            for (int c = 0; c < co; ++c) out[c] = layer.bias[c];
            for (int j = gather.ptr[o]; j < gather.ptr[o + 1]; ++j) {
                auto [k, i] = gather.entries[j];
                const double* in = x.feature(i);
                const double* Wk = W + static_cast<size_t>(k) * ci * co;
                for (int a = 0; a < ci; ++a) {
                    double xv = in[a];
                    if (xv == 0.0) continue;
                    const double* row = Wk + static_cast<size_t>(a) * co;
                    for (int c = 0; c < co; ++c) out[c] += xv * row[c];
                }
            }
        }
    });

    if (ctx) {
        ctx->rulebook = std::move(rb);
        ctx->input = &x;
    }
    return y;
}

SparseVoxelTensor sparse_conv_backward(const SparseConvContext& ctx, const SparseConv& layer,
                                       const SparseVoxelTensor& d_out,
                                       std::vector<double>& d_weights,
                                       std::vector<double>& d_bias) {
    const SparseVoxelTensor& x = *ctx.input;
    if (d_out.channels != layer.c_out)
        throw ArgumentError("sparse_conv_backward: cotangent channel mismatch");
    if (d_weights.size() != layer.weights.size() || d_bias.size() != layer.bias.size())
        throw ArgumentError("sparse_conv_backward: gradient shape mismatch");

    const int ci = layer.c_in, co = layer.c_out;
    const double* W = layer.weights.data();

    // d_input: gather over the transposed rulebook, parallel over input sites.
    SparseVoxelTensor dx = x.like(ci);
    Adjacency scatter = group_by(ctx.rulebook, /*by_output=*/false, x.site_count());
    parallel_chunks(x.site_count(), [&](size_t b, size_t e, int) {
        for (size_t i = b; i < e; ++i) {
            double* out = dx.feature(i);
            for (int j = scatter.ptr[i]; j < scatter.ptr[i + 1]; ++j) {
                auto [k, o] = scatter.entries[j];
                const double* dy = d_out.feature(o);
                const double* Wk = W + static_cast<size_t>(k) * ci * co;
                for (int a = 0; a < ci; ++a) {
                    const double* row = Wk + static_cast<size_t>(a) * co;
                    double acc = 0;
                    for (int c = 0; c < co; ++c) acc += row[c] * dy[c];
                    out[a] += acc;
                }
            }
        }
    });

    // d_weights: kernel offsets are independent accumulators.
    parallel_for(27, [&](size_t k) {
        double* dWk = d_weights.data() + k * ci * co;
        for (const auto& [i, o] : ctx.rulebook.pairs[k]) {
            const double* in = x.feature(i);
            const double* dy = d_out.feature(o);
            for (int a = 0; a < ci; ++a) {
                double xv = in[a];
                if (xv == 0.0) continue;
                double* row = dWk + static_cast<size_t>(a) * co;
                for (int c = 0; c < co; ++c) row[c] += xv * dy[c];
            }
        }
    });

    // d_bias: every output site contributes once.
    for (size_t o = 0; o < d_out.site_count(); ++o) {
        const double* dy = d_out.feature(o);
        for (int c = 0; c < co; ++c) d_bias[c] += dy[c];
    }
    return dx;
}

}  // namespace recon
