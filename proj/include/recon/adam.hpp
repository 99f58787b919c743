#pragma once

#include <cstddef>
#include <vector>

namespace recon {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment state for a flat list of parameter tensors.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(const std::vector<size_t>& tensor_sizes);

    // One update over matching parameter/gradient views.
    void step(const AdamConfig& cfg, const std::vector<std::pair<double*, size_t>>& params,
              const std::vector<std::pair<const double*, size_t>>& grads);

    long iterations() const { return t_; }

private:
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

}  // namespace recon
