#pragma once

#include <string>

#include "dggan/core/tensor.hpp"

namespace dggan::gan {

enum class GeneratorLossVariant { minimax, non_saturating };

GeneratorLossVariant generator_loss_variant_from_string(const std::string& s);
const char* to_string(GeneratorLossVariant v);

// Log arguments are clamped to [kLogEps, 1 - kLogEps] so losses stay finite
// when a sigmoid saturates numerically.
inline constexpr double kLogEps = 1e-7;

// mean log D(real) + mean log(1 - D(fake)). The discriminator update ascends
// this value. Optional gradients w.r.t. the score vectors.
double gan_loss_discriminator(const Tensor& real_scores, const Tensor& fake_scores,
                              Tensor* grad_real = nullptr, Tensor* grad_fake = nullptr);

// minimax: mean log(1 - D(fake)); non_saturating: -mean log D(fake). The
// generator update descends the returned value either way.
double gan_loss_generator(const Tensor& fake_scores, GeneratorLossVariant variant,
                          Tensor* grad_fake = nullptr);

}  // namespace dggan::gan
