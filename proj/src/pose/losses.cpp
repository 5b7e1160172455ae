#include "dggan/pose/losses.hpp"

#include <cmath>

#include "dggan/core/errors.hpp"

namespace dggan::pose {

void LossWeights::validate() const {
  if (lambda_z < 0 || lambda_2d < 0 || lambda_dep < 0 || lambda_t < 0 || lambda_g < 0)
    throw ConfigError("loss weights must be non-negative");
  if (lambda_t == 0 && lambda_g == 0)
    throw ConfigError("lambda_t and lambda_g must not both be zero");
}

SmoothL1Variant smooth_l1_variant_from_string(const std::string& s) {
  if (s == "paper") return SmoothL1Variant::paper;
  if (s == "continuous" || s == "continuous_smooth_l1") return SmoothL1Variant::continuous;
  throw ConfigError("unknown smooth L1 variant '" + s + "'");
}

const char* to_string(SmoothL1Variant v) {
  return v == SmoothL1Variant::paper ? "paper" : "continuous";
}

double loss_2d(const Tensor& pred, const Tensor& target, Tensor* grad_pred) {
  if (pred.ndim() != 5 || target.ndim() != 4)
    throw ShapeError("loss_2d: expected pred [B,S,K,h,w] and target [B,K,h,w]");
  const int bsz = pred.dim(0), stages = pred.dim(1), k = pred.dim(2), h = pred.dim(3),
            w = pred.dim(4);
  if (target.dim(0) != bsz || target.dim(1) != k || target.dim(2) != h || target.dim(3) != w)
    throw ShapeError("loss_2d: pred/target shape mismatch");
  if (grad_pred) *grad_pred = Tensor::zeros(pred.shape());
  const double norm = 1.0 / (static_cast<double>(stages) * k * bsz);
  double loss = 0.0;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int n = 0; n < bsz; ++n)
    for (int s = 0; s < stages; ++s)
      for (int j = 0; j < k; ++j) {
        const double* p =
            pred.data() + (((static_cast<std::size_t>(n) * stages + s) * k + j) * plane);
        const double* t = target.data() + ((static_cast<std::size_t>(n) * k + j) * plane);
        double* g = grad_pred ? grad_pred->data() +
                                    (((static_cast<std::size_t>(n) * stages + s) * k + j) * plane)
                              : nullptr;
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - t[i];
          loss += d * d * norm;
          if (g) g[i] = 2.0 * d * norm;
        }
      }
  return loss;
}

double loss_z(const Tensor& z, const Tensor& z_star, SmoothL1Variant variant, Tensor* grad_z) {
  if (z.numel() != z_star.numel()) throw ShapeError("loss_z: size mismatch");
  const std::int64_t n = z.numel();
  if (grad_z) *grad_z = Tensor::zeros(z.shape());
  const int bsz = z.ndim() == 2 ? z.dim(0) : 1;
  const double k = static_cast<double>(n) / bsz;
  const double norm = 1.0 / (k * bsz);
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = z[i] - z_star[i];
    const double ad = std::fabs(d);
    if (ad <= 0.5) {
      loss += 0.5 * d * d * norm;
      if (grad_z) (*grad_z)[i] = d * norm;
    } else {
      loss += (variant == SmoothL1Variant::paper ? ad : ad - 0.125) * norm;
      if (grad_z) (*grad_z)[i] = (d > 0 ? 1.0 : -1.0) * norm;
    }
  }
  return loss;
}

double loss_dep(const Tensor& d, const Tensor& d_star, Tensor* grad_d, Tensor* grad_d_star) {
  if (d.numel() != d_star.numel()) throw ShapeError("loss_dep: shape mismatch");
  const std::int64_t n = d.numel();
  if (grad_d) *grad_d = Tensor::zeros(d.shape());
  if (grad_d_star) *grad_d_star = Tensor::zeros(d_star.shape());
  const double norm = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double diff = d[i] - d_star[i];
    loss += std::fabs(diff) * norm;
    const double s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    if (grad_d) (*grad_d)[i] = s * norm;
    if (grad_d_star) (*grad_d_star)[i] = -s * norm;
  }
  return loss;
}

double task_loss(double l_z, double l_2d, double l_dep, const LossWeights& w) {
  if (!std::isfinite(l_z) || !std::isfinite(l_2d) || !std::isfinite(l_dep))
    throw Error("task_loss: component losses must be finite");
  return w.lambda_z * l_z + w.lambda_2d * l_2d + w.lambda_dep * l_dep;
}

}  // namespace dggan::pose
