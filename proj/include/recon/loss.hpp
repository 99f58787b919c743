#pragma once

#include <vector>

namespace recon {

// Huber penalty: quadratic within |r| < delta, linear beyond, C1 at the knee.
double huber(double residual, double delta);
double huber_derivative(double residual, double delta);

// Mean Huber over (pred - gt). Throws on empty batches.
double loss_sdf(const std::vector<double>& pred, const std::vector<double>& gt,
                double delta);

// Mean Huber of predictions against a zero target; empty batch gives 0 so the
// depth term can be switched off.
double loss_depth(const std::vector<double>& pred, double delta);

// Cotangents of the per-point predictions for scale * mean-Huber losses.
void loss_sdf_backward(const std::vector<double>& pred, const std::vector<double>& gt,
                       double delta, double scale, std::vector<double>& d_pred);
void loss_depth_backward(const std::vector<double>& pred, double delta, double scale,
                         std::vector<double>& d_pred);

}  // namespace recon
