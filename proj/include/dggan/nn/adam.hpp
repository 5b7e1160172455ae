#pragma once

#include <cstdint>
#include <vector>

#include "dggan/nn/module.hpp"

namespace dggan::nn {

// Adaptive-moment gradient descent over a fixed parameter list. Moment slots
// are addressed by position, so the parameter list must be reconstructed in
// the same order when restoring from a checkpoint.
class Adam {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(std::vector<Param*> params, Config cfg);

  void step();
  void zero_grad();

  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }
  std::size_t size() const { return params_.size(); }
  Tensor& m(std::size_t i) { return m_[i]; }
  Tensor& v(std::size_t i) { return v_[i]; }
  const Config& config() const { return cfg_; }

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  Config cfg_;
  std::int64_t t_ = 0;
};

}  // namespace dggan::nn
