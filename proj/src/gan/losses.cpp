#include "dggan/gan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dggan/core/errors.hpp"

namespace dggan::gan {

GeneratorLossVariant generator_loss_variant_from_string(const std::string& s) {
  if (s == "minimax") return GeneratorLossVariant::minimax;
  if (s == "non_saturating") return GeneratorLossVariant::non_saturating;
  throw ConfigError("unknown generator loss variant '" + s + "'");
}

const char* to_string(GeneratorLossVariant v) {
  return v == GeneratorLossVariant::minimax ? "minimax" : "non_saturating";
}

namespace {
inline double clamp_score(double s) { return std::clamp(s, kLogEps, 1.0 - kLogEps); }
}  // namespace

double gan_loss_discriminator(const Tensor& real_scores, const Tensor& fake_scores,
                              Tensor* grad_real, Tensor* grad_fake) {
  const std::int64_t nr = real_scores.numel();
  const std::int64_t nf = fake_scores.numel();
  if (nr == 0 || nf == 0) throw ShapeError("gan_loss_discriminator: empty score batch");
  if (grad_real) *grad_real = Tensor::zeros(real_scores.shape());
  if (grad_fake) *grad_fake = Tensor::zeros(fake_scores.shape());
  double loss = 0.0;
  for (std::int64_t i = 0; i < nr; ++i) {
    const double s = clamp_score(real_scores[i]);
    loss += std::log(s) / nr;
    if (grad_real && real_scores[i] > kLogEps && real_scores[i] < 1.0 - kLogEps)
      (*grad_real)[i] = 1.0 / (s * nr);
  }
  for (std::int64_t i = 0; i < nf; ++i) {
    const double s = clamp_score(fake_scores[i]);
    loss += std::log(1.0 - s) / nf;
    if (grad_fake && fake_scores[i] > kLogEps && fake_scores[i] < 1.0 - kLogEps)
      (*grad_fake)[i] = -1.0 / ((1.0 - s) * nf);
  }
  return loss;
}

double gan_loss_generator(const Tensor& fake_scores, GeneratorLossVariant variant,
                          Tensor* grad_fake) {
  const std::int64_t n = fake_scores.numel();
  if (n == 0) throw ShapeError("gan_loss_generator: empty score batch");
  if (grad_fake) *grad_fake = Tensor::zeros(fake_scores.shape());
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double s = clamp_score(fake_scores[i]);
    const bool interior = fake_scores[i] > kLogEps && fake_scores[i] < 1.0 - kLogEps;
    if (variant == GeneratorLossVariant::minimax) {
      loss += std::log(1.0 - s) / n;
      if (grad_fake && interior) (*grad_fake)[i] = -1.0 / ((1.0 - s) * n);
    } else {
      loss += -std::log(s) / n;
      if (grad_fake && interior) (*grad_fake)[i] = -1.0 / (s * n);
    }
  }
  return loss;
}

}  // namespace dggan::gan
