#include "recon/loss.hpp"

#include <cmath>

#include "recon/errors.hpp"

namespace recon {

double huber(double residual, double delta) {
    if (delta <= 0) throw ArgumentError("huber: delta must be positive");
    double a = std::abs(residual);
    if (a < delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
    if (delta <= 0) throw ArgumentError("huber: delta must be positive");
    double a = std::abs(residual);
    if (a < delta) return residual;
    return residual > 0 ? delta : -delta;
}

double loss_sdf(const std::vector<double>& pred, const std::vector<double>& gt,
                double delta) {
    if (pred.empty()) throw ArgumentError("loss_sdf: empty batch");
    if (pred.size() != gt.size()) throw ArgumentError("loss_sdf: length mismatch");
    double sum = 0;
    for (size_t i = 0; i < pred.size(); ++i) sum += huber(pred[i] - gt[i], delta);
    return sum / static_cast<double>(pred.size());
}

double loss_depth(const std::vector<double>& pred, double delta) {
    if (pred.empty()) return 0.0;
    double sum = 0;
    for (double p : pred) sum += huber(p, delta);
    return sum / static_cast<double>(pred.size());
}

void loss_sdf_backward(const std::vector<double>& pred, const std::vector<double>& gt,
                       double delta, double scale, std::vector<double>& d_pred) {
    if (pred.empty()) throw ArgumentError("loss_sdf: empty batch");
    if (pred.size() != gt.size()) throw ArgumentError("loss_sdf: length mismatch");
    double k = scale / static_cast<double>(pred.size());
    d_pred.resize(pred.size());
    for (size_t i = 0; i < pred.size(); ++i)
        d_pred[i] = k * huber_derivative(pred[i] - gt[i], delta);
}

void loss_depth_backward(const std::vector<double>& pred, double delta, double scale,
                         std::vector<double>& d_pred) {
    d_pred.resize(pred.size());
    if (pred.empty()) return;
    double k = scale / static_cast<double>(pred.size());
    for (size_t i = 0; i < pred.size(); ++i)
        d_pred[i] = k * huber_derivative(pred[i], delta);
}

}  // namespace recon
