#pragma once

#include <memory>

#include "dggan/core/rng.hpp"
#include "dggan/nn/layers.hpp"
#include "dggan/nn/module.hpp"

namespace dggan::gan {

struct GeneratorConfig {
  int in_size = 64;        // RGB input H = W; must be divisible by 16
  int base_channels = 16;  // encoder width, doubled twice going down
  int residual_blocks = 2;
};

// RGB -> normalized depth map. Encoder-decoder: 4 stride-2 conv blocks down,
// residual blocks at the bottleneck, 4 stride-2 transposed-conv blocks up,
// 1x1 conv, sigmoid. Output range [0,1] is architectural.
class GeneratorNet : public nn::Module {
 public:
  GeneratorNet(const GeneratorConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& rgb) override;  // [B,3,H,W] -> [B,1,H,W]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, nn::NamedParams& out) override;

  const GeneratorConfig& config() const { return cfg_; }

 private:
  GeneratorConfig cfg_;
  nn::Sequential body_;
};

struct DiscriminatorConfig {
  int in_size = 64;
  int base_channels = 16;
};

// Depth map -> realness score. 4 stride-2 conv blocks, global average pool,
// linear, sigmoid; one scalar per image, strictly inside (0,1).
class DiscriminatorNet : public nn::Module {
 public:
  DiscriminatorNet(const DiscriminatorConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& depth) override;  // [B,1,H,W] -> [B]
  Tensor backward(const Tensor& gy) override;    // [B] -> [B,1,H,W]
  void collect(const std::string& prefix, nn::NamedParams& out) override;

  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  nn::Sequential body_;
};

}  // namespace dggan::gan
