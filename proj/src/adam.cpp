#include "recon/adam.hpp"

#include <cmath>

#include "recon/errors.hpp"
#include "recon/parallel.hpp"

namespace recon {

AdamState::AdamState(const std::vector<size_t>& tensor_sizes) {
    for (size_t n : tensor_sizes) {
        m_.emplace_back(n, 0.0);
        v_.emplace_back(n, 0.0);
    }
}

void AdamState::step(const AdamConfig& cfg,
                     const std::vector<std::pair<double*, size_t>>& params,
                     const std::vector<std::pair<const double*, size_t>>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ArgumentError("AdamState: tensor count mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(cfg.beta1, t_);
    double bc2 = 1.0 - std::pow(cfg.beta2, t_);
    for (size_t k = 0; k < params.size(); ++k) {
        auto [p, n] = params[k];
        auto [g, gn] = grads[k];
        if (n != m_[k].size() || gn != n)
            throw ArgumentError("AdamState: tensor size mismatch");
        double* m = m_[k].data();
        double* v = v_[k].data();
        parallel_chunks(n, [&](size_t begin, size_t end, int) {
            for (size_t i = begin; i < end; ++i) {
                m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            }
        });
    }
}

}  // namespace recon
