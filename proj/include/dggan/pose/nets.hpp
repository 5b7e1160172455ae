#pragma once

#include <memory>
#include <vector>

#include "dggan/core/rng.hpp"
#include "dggan/nn/layers.hpp"
#include "dggan/nn/module.hpp"

namespace dggan::pose {

struct CpmConfig {
  int k = 21;
  int in_size = 64;
  int heatmap_size = 8;      // in_size / 8 by default; must divide in_size by a power of two
  int feature_channels = 32; // shared image features
  int stage_channels = 32;   // width inside each stage
  int stages = 6;
};

// Multi-stage 2D heatmap predictor. A shared feature extractor downsamples
// the RGB input to heatmap resolution; stage 1 consumes the features, every
// later stage consumes features concatenated with the previous stage's
// heatmaps. Each stage is seven convolutions with ReLUs in between.
class CpmNet : public nn::Module {
 public:
  CpmNet(const CpmConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& rgb) override;       // [B,3,H,W] -> [B,S,K,h,w]
  Tensor backward(const Tensor& grad_stack) override;  // -> grad wrt rgb
  void collect(const std::string& prefix, nn::NamedParams& out) override;

  const CpmConfig& config() const { return cfg_; }

  // Final-stage heatmaps of the most recent forward, shape [B,K,h,w].
  Tensor final_heatmaps() const;

 private:
  CpmConfig cfg_;
  nn::Sequential stem_;
  std::vector<std::unique_ptr<nn::Sequential>> stage_nets_;
  Tensor features_;
  std::vector<Tensor> stage_outputs_;
};

struct RegressionConfig {
  int k = 21;
  int heatmap_size = 8;
  int conv_channels = 32;
  int fc1 = 512;
  int fc2 = 256;
};

// Relative-depth regression head: a single CPM-like stage (seven convs) over
// the final heatmaps, global average pooling, then three fully connected
// layers down to K scalars.
class RegressionNet : public nn::Module {
 public:
  RegressionNet(const RegressionConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& final_heatmaps) override;  // [B,K,h,w] -> [B,K]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, nn::NamedParams& out) override;

 private:
  RegressionConfig cfg_;
  nn::Sequential body_;
};

struct DepthRegularizerConfig {
  int k = 21;
  int out_size = 64;  // power of two, <= 64 given the fixed 6-layer stack
  std::vector<int> channels = {128, 64, 32, 16, 8};  // between the 6 layers
};

// Decodes per-joint relative depths (as a K-channel 1x1 image) to a 1-channel
// relative depth map through exactly six transposed convolutions; sigmoid
// output keeps the map in [0,1]. The first log2(out_size) layers use stride 2,
// the rest stride 1.
class DepthRegularizerNet : public nn::Module {
 public:
  DepthRegularizerNet(const DepthRegularizerConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& z) override;  // [B,K] -> [B,1,n,n]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, nn::NamedParams& out) override;

  int transposed_layer_count() const { return transposed_layers_; }

 private:
  DepthRegularizerConfig cfg_;
  nn::Sequential body_;
  int transposed_layers_ = 0;
  int batch_ = 0;
};

}  // namespace dggan::pose
