#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dggan/core/rng.hpp"
#include "dggan/nn/module.hpp"

namespace dggan::testing {

// Central finite differences against analytic parameter gradients.
// `run` must zero grads, execute forward + loss + backward, and return the
// loss. Elements whose h and h/2 estimates disagree sit on a ReLU kink where
// the symmetric difference is meaningless; they are skipped (at most 2% of
// all elements, otherwise the check fails loudly).
// Returns ||g_analytic - g_numeric|| / (||g_analytic|| + ||g_numeric||).
inline double gradcheck_params(const std::function<double()>& run,
                               const std::vector<nn::Param*>& params, double h = 1e-5) {
  run();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (nn::Param* p : params) analytic.push_back(p->grad.raw());

  double dot_diff = 0.0, norm_a = 0.0, norm_n = 0.0;
  std::int64_t total = 0, skipped = 0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = params[pi]->value;
    for (std::int64_t i = 0; i < value.numel(); ++i) {
      ++total;
      const double orig = value[i];
      const double step = h * std::max(1.0, std::fabs(orig));
      const auto central = [&](double hh) {
        value[i] = orig + hh;
        const double plus = run();
        value[i] = orig - hh;
        const double minus = run();
        value[i] = orig;
        return (plus - minus) / (2.0 * hh);
      };
      const double n1 = central(step);
      const double n2 = central(step / 2.0);
      if (std::fabs(n1 - n2) > 1e-4 * std::max(1.0, std::fabs(n1) + std::fabs(n2))) {
        ++skipped;
        continue;
      }
      const double a = analytic[pi][static_cast<std::size_t>(i)];
      dot_diff += (a - n2) * (a - n2);
      norm_a += a * a;
      norm_n += n2 * n2;
    }
  }
  if (skipped * 50 > total) return 1.0;  // too many kinks: instance is unusable
  const double denom = std::sqrt(norm_a) + std::sqrt(norm_n);
  return denom > 0 ? std::sqrt(dot_diff) / denom : 0.0;
}

// Same, for the gradient w.r.t. an input tensor. `run` recomputes the loss
// from the current contents of `input`; `analytic` is the backward result.
inline double gradcheck_input(const std::function<double()>& run, Tensor& input,
                              const Tensor& analytic, double h = 1e-5) {
  double dot_diff = 0.0, norm_a = 0.0, norm_n = 0.0;
  std::int64_t total = 0, skipped = 0;
  for (std::int64_t i = 0; i < input.numel(); ++i) {
    ++total;
    const double orig = input[i];
    const double step = h * std::max(1.0, std::fabs(orig));
    const auto central = [&](double hh) {
      input[i] = orig + hh;
      const double plus = run();
      input[i] = orig - hh;
      const double minus = run();
      input[i] = orig;
      return (plus - minus) / (2.0 * hh);
    };
    const double n1 = central(step);
    const double n2 = central(step / 2.0);
    if (std::fabs(n1 - n2) > 1e-4 * std::max(1.0, std::fabs(n1) + std::fabs(n2))) {
      ++skipped;
      continue;
    }
    const double a = analytic[i];
    dot_diff += (a - n2) * (a - n2);
    norm_a += a * a;
    norm_n += n2 * n2;
  }
  if (skipped * 50 > total) return 1.0;
  const double denom = std::sqrt(norm_a) + std::sqrt(norm_n);
  return denom > 0 ? std::sqrt(dot_diff) / denom : 0.0;
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Uniformly re-randomizes every parameter (including biases, which are
// zero-initialized by default and would otherwise park ReLU inputs exactly on
// the kink when their receptive field is dead).
inline void randomize_params(const std::vector<nn::Param*>& params, Rng& rng, double lo = -0.3,
                             double hi = 0.3) {
  for (nn::Param* p : params)
    for (std::int64_t i = 0; i < p->value.numel(); ++i) p->value[i] = rng.uniform(lo, hi);
}

}  // namespace dggan::testing
