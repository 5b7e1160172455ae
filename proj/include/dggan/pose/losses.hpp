#pragma once

#include <string>

#include "dggan/core/tensor.hpp"

namespace dggan::pose {

struct LossWeights {
  double lambda_z = 1.0;
  double lambda_2d = 1.0;
  double lambda_dep = 0.1;
  double lambda_t = 1.0;
  double lambda_g = 0.01;

  void validate() const;
};

enum class SmoothL1Variant {
  paper,       // 0.5 d^2 for |d| <= 0.5, |d| otherwise (discontinuous at 0.5)
  continuous,  // |d| - 0.125 on the linear branch
};

SmoothL1Variant smooth_l1_variant_from_string(const std::string& s);
const char* to_string(SmoothL1Variant v);

// Stage-wise heatmap MSE: (1/(S*K)) sum_s sum_k ||H_s^k - H_*^k||_F^2, then
// mean over the batch. pred [B,S,K,h,w], target [B,K,h,w].
double loss_2d(const Tensor& pred, const Tensor& target, Tensor* grad_pred = nullptr);

// Smooth L1 over relative depths, mean over joints then batch. [B,K].
double loss_z(const Tensor& z, const Tensor& z_star,
              SmoothL1Variant variant = SmoothL1Variant::paper, Tensor* grad_z = nullptr);

// Mean absolute difference between predicted and target relative depth maps,
// [B,1,n,m]. grad_target is the gradient into the target path (used when the
// regularizer target is a live generator output).
double loss_dep(const Tensor& d, const Tensor& d_star, Tensor* grad_d = nullptr,
                Tensor* grad_d_star = nullptr);

// lambda_z * l_z + lambda_2d * l_2d + lambda_dep * l_dep.
double task_loss(double l_z, double l_2d, double l_dep, const LossWeights& w);

}  // namespace dggan::pose
