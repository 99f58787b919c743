#include "recon/mlp.hpp"

#include "recon/errors.hpp"

namespace recon {

MlpParams::MlpParams(std::vector<int> layer_widths) : widths(std::move(layer_widths)) {
    if (widths.size() < 2) throw ArgumentError("MlpParams: need at least two widths");
    if (widths.back() != 1) throw ArgumentError("MlpParams: output width must be 1");
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        weights.emplace_back(static_cast<size_t>(widths[l]) * widths[l + 1], 0.0);
        biases.emplace_back(widths[l + 1], 0.0);
    }
}

MlpGradients::MlpGradients(const MlpParams& params) {
    for (size_t l = 0; l < params.weights.size(); ++l) {
        d_weights.emplace_back(params.weights[l].size(), 0.0);
        d_biases.emplace_back(params.biases[l].size(), 0.0);
    }
}

double mlp_forward(const MlpParams& params, const double* input, MlpActivations* acts) {
    size_t L = params.layer_count();
    std::vector<double> cur(input, input + params.in_dim());
    if (acts) {
        acts->pre.assign(L, {});
        acts->post.assign(L + 1, {});
        acts->post[0] = cur;
    }
    for (size_t l = 0; l < L; ++l) {
        int in_w = params.widths[l], out_w = params.widths[l + 1];
        std::vector<double> next(params.biases[l]);
        const double* W = params.weights[l].data();
        for (int i = 0; i < in_w; ++i) {
            double xv = cur[i];
            if (xv == 0.0) continue;
            const double* row = W + static_cast<size_t>(i) * out_w;
            for (int o = 0; o < out_w; ++o) next[o] += xv * row[o];
        }
        if (acts) acts->pre[l] = next;
        if (l + 1 < L)
            for (double& v : next) v = v > 0 ? v : kLeakySlope * v;
        if (acts) acts->post[l + 1] = next;
        cur = std::move(next);
    }
    return cur[0];
}

void mlp_backward(const MlpParams& params, const MlpActivations& acts, double d_output,
                  double* d_input, MlpGradients& grads) {
    size_t L = params.layer_count();
    std::vector<double> d_cur = {d_output};
    for (size_t l = L; l-- > 0;) {
        int in_w = params.widths[l], out_w = params.widths[l + 1];
        if (l + 1 < L) {
            // Leaky-ReLU backward on the hidden layer output.
            for (int o = 0; o < out_w; ++o)
                if (acts.pre[l][o] <= 0) d_cur[o] *= kLeakySlope;
        }
        const std::vector<double>& in = acts.post[l];
        const double* W = params.weights[l].data();
        double* dW = grads.d_weights[l].data();
        std::vector<double> d_prev(in_w, 0.0);
        for (int i = 0; i < in_w; ++i) {
            const double* row = W + static_cast<size_t>(i) * out_w;
            double* drow = dW + static_cast<size_t>(i) * out_w;
            double xv = in[i];
            double acc = 0;
            for (int o = 0; o < out_w; ++o) {
                acc += row[o] * d_cur[o];
                drow[o] += xv * d_cur[o];
            }
            d_prev[i] = acc;
        }
        for (int o = 0; o < out_w; ++o) grads.d_biases[l][o] += d_cur[o];
        d_cur = std::move(d_prev);
    }
    for (int i = 0; i < params.in_dim(); ++i) d_input[i] = d_cur[i];
}

}  // namespace recon
