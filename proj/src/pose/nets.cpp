#include "dggan/pose/nets.hpp"

#include <cmath>
#include <cstring>

#include "dggan/core/errors.hpp"
#include "dggan/nn/ops.hpp"

namespace dggan::pose {

namespace {

int log2_exact(int n) {
  int p = 0;
  while ((1 << p) < n) ++p;
  if ((1 << p) != n) return -1;
  return p;
}

// Seven convolutions with ReLUs after the first six; the last two are 1x1.
void build_stage(nn::Sequential& seq, int in_ch, int mid_ch, int out_ch, Rng& rng) {
  seq.emplace<nn::Conv2d>("conv1", in_ch, mid_ch, 3, 1, 1, rng);
  seq.emplace<nn::ReLU>("relu1");
  for (int i = 2; i <= 5; ++i) {
    seq.emplace<nn::Conv2d>("conv" + std::to_string(i), mid_ch, mid_ch, 3, 1, 1, rng);
    seq.emplace<nn::ReLU>("relu" + std::to_string(i));
  }
  seq.emplace<nn::Conv2d>("conv6", mid_ch, mid_ch, 1, 1, 0, rng);
  seq.emplace<nn::ReLU>("relu6");
  seq.emplace<nn::Conv2d>("conv7", mid_ch, out_ch, 1, 1, 0, rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// CpmNet

CpmNet::CpmNet(const CpmConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.stages < 1) throw ConfigError("cpm: stages must be >= 1");
  const int ratio = cfg.in_size / cfg.heatmap_size;
  if (cfg.heatmap_size * ratio != cfg.in_size || log2_exact(ratio) < 0)
    throw ConfigError("cpm: in_size / heatmap_size must be a power of two");
  const int f = cfg.feature_channels;
  stem_.emplace<nn::Conv2d>("conv_in", 3, f, 3, 1, 1, rng);
  stem_.emplace<nn::ReLU>("relu_in");
  for (int i = 0; i < log2_exact(ratio); ++i) {
    stem_.emplace<nn::Conv2d>("down" + std::to_string(i), f, f, 3, 2, 1, rng);
    stem_.emplace<nn::ReLU>("down" + std::to_string(i) + "_relu");
  }
  stem_.emplace<nn::Conv2d>("conv_out", f, f, 3, 1, 1, rng);
  stem_.emplace<nn::ReLU>("relu_out");

  for (int s = 0; s < cfg.stages; ++s) {
    auto stage = std::make_unique<nn::Sequential>();
    const int in_ch = s == 0 ? f : f + cfg.k;
    build_stage(*stage, in_ch, cfg.stage_channels, cfg.k, rng);
    stage_nets_.push_back(std::move(stage));
  }
}

Tensor CpmNet::forward(const Tensor& rgb) {
  if (rgb.ndim() != 4 || rgb.dim(1) != 3 || rgb.dim(2) != cfg_.in_size ||
      rgb.dim(3) != cfg_.in_size)
    throw ShapeError("cpm_forward: expected [B,3," + std::to_string(cfg_.in_size) + "," +
                     std::to_string(cfg_.in_size) + "] input");
  const int bsz = rgb.dim(0);
  const int h = cfg_.heatmap_size;
  features_ = stem_.forward(rgb);
  stage_outputs_.clear();
  stage_outputs_.reserve(stage_nets_.size());
  for (std::size_t s = 0; s < stage_nets_.size(); ++s) {
    const Tensor in =
        s == 0 ? features_ : nn::concat_channels(features_, stage_outputs_[s - 1]);
    stage_outputs_.push_back(stage_nets_[s]->forward(in));
  }
  Tensor stack({bsz, cfg_.stages, cfg_.k, h, h});
  const std::size_t per_sample = static_cast<std::size_t>(cfg_.k) * h * h;
  for (int s = 0; s < cfg_.stages; ++s)
    for (int n = 0; n < bsz; ++n)
      std::memcpy(stack.data() + ((static_cast<std::size_t>(n) * cfg_.stages + s) * per_sample),
                  stage_outputs_[static_cast<std::size_t>(s)].data() + static_cast<std::size_t>(n) * per_sample,
                  sizeof(double) * per_sample);
  return stack;
}

Tensor CpmNet::backward(const Tensor& grad_stack) {
  const int bsz = grad_stack.dim(0);
  const int h = cfg_.heatmap_size;
  const std::size_t per_sample = static_cast<std::size_t>(cfg_.k) * h * h;

  // Per-stage external gradients from the stack.
  std::vector<Tensor> gstage(stage_nets_.size());
  for (std::size_t s = 0; s < stage_nets_.size(); ++s) {
    gstage[s] = Tensor({bsz, cfg_.k, h, h});
    for (int n = 0; n < bsz; ++n)
      std::memcpy(gstage[s].data() + static_cast<std::size_t>(n) * per_sample,
                  grad_stack.data() +
                      ((static_cast<std::size_t>(n) * cfg_.stages + static_cast<int>(s)) * per_sample),
                  sizeof(double) * per_sample);
  }

  Tensor gfeatures = Tensor::zeros(features_.shape());
  for (int s = static_cast<int>(stage_nets_.size()) - 1; s >= 0; --s) {
    const Tensor gin = stage_nets_[static_cast<std::size_t>(s)]->backward(gstage[static_cast<std::size_t>(s)]);
    if (s == 0) {
      gfeatures += gin;
    } else {
      Tensor gf, gh;
      nn::split_channels(gin, cfg_.feature_channels, gf, gh);
      gfeatures += gf;
      gstage[static_cast<std::size_t>(s - 1)] += gh;
    }
  }
  return stem_.backward(gfeatures);
}

void CpmNet::collect(const std::string& prefix, nn::NamedParams& out) {
  const std::string base = prefix.empty() ? "cpm" : prefix;
  stem_.collect(base + ".stem", out);
  for (std::size_t s = 0; s < stage_nets_.size(); ++s)
    stage_nets_[s]->collect(base + ".stage" + std::to_string(s + 1), out);
}

Tensor CpmNet::final_heatmaps() const {
  if (stage_outputs_.empty()) throw Error("cpm: no forward pass recorded");
  return stage_outputs_.back();
}

// ---------------------------------------------------------------------------
// RegressionNet

RegressionNet::RegressionNet(const RegressionConfig& cfg, Rng& rng) : cfg_(cfg) {
  build_stage(body_, cfg.k, cfg.conv_channels, cfg.conv_channels, rng);
  body_.emplace<nn::ReLU>("relu7");
  body_.emplace<nn::GlobalAvgPool2d>("pool");
  body_.emplace<nn::Linear>("fc1", cfg.conv_channels, cfg.fc1, rng);
  body_.emplace<nn::ReLU>("fc1_relu");
  body_.emplace<nn::Linear>("fc2", cfg.fc1, cfg.fc2, rng);
  body_.emplace<nn::ReLU>("fc2_relu");
  body_.emplace<nn::Linear>("fc3", cfg.fc2, cfg.k, rng);
}

Tensor RegressionNet::forward(const Tensor& final_heatmaps) {
  if (final_heatmaps.ndim() != 4 || final_heatmaps.dim(1) != cfg_.k ||
      final_heatmaps.dim(2) != cfg_.heatmap_size || final_heatmaps.dim(3) != cfg_.heatmap_size)
    throw ShapeError("regression_forward: expected [B," + std::to_string(cfg_.k) + "," +
                     std::to_string(cfg_.heatmap_size) + "," + std::to_string(cfg_.heatmap_size) +
                     "] heatmaps");
  return body_.forward(final_heatmaps);
}

Tensor RegressionNet::backward(const Tensor& gy) { return body_.backward(gy); }

void RegressionNet::collect(const std::string& prefix, nn::NamedParams& out) {
  body_.collect(prefix.empty() ? "regression" : prefix, out);
}

// ---------------------------------------------------------------------------
// DepthRegularizerNet

DepthRegularizerNet::DepthRegularizerNet(const DepthRegularizerConfig& cfg, Rng& rng) : cfg_(cfg) {
  constexpr int kLayers = 6;
  if (static_cast<int>(cfg.channels.size()) != kLayers - 1)
    throw ConfigError("depth regularizer: need 5 intermediate channel widths");
  const int doublings = log2_exact(cfg.out_size);
  if (doublings < 0 || doublings > kLayers)
    throw ConfigError("depth regularizer: out_size must be a power of two <= 64");
  std::vector<int> widths;
  widths.push_back(cfg.k);
  for (int c : cfg.channels) widths.push_back(c);
  widths.push_back(1);
  for (int i = 0; i < kLayers; ++i) {
    const bool upsample = i < doublings;
    // Stride-2 layers double the spatial size (k4 s2 p1); stride-1 layers
    // keep it (k3 s1 p1).
    if (upsample)
      body_.emplace<nn::ConvTranspose2d>("up" + std::to_string(i), widths[i], widths[i + 1], 4, 2,
                                         1, rng);
    else
      body_.emplace<nn::ConvTranspose2d>("up" + std::to_string(i), widths[i], widths[i + 1], 3, 1,
                                         1, rng);
    ++transposed_layers_;
    if (i + 1 < kLayers) body_.emplace<nn::ReLU>("relu" + std::to_string(i));
  }
  body_.emplace<nn::Sigmoid>("squash");
}

Tensor DepthRegularizerNet::forward(const Tensor& z) {
  if (z.ndim() != 2 || z.dim(1) != cfg_.k)
    throw ShapeError("depth_regularizer_forward: expected [B," + std::to_string(cfg_.k) + "]");
  batch_ = z.dim(0);
  return body_.forward(z.reshaped({batch_, cfg_.k, 1, 1}));
}

Tensor DepthRegularizerNet::backward(const Tensor& gy) {
  return body_.backward(gy).reshaped({batch_, cfg_.k});
}

void DepthRegularizerNet::collect(const std::string& prefix, nn::NamedParams& out) {
  body_.collect(prefix.empty() ? "depth_regularizer" : prefix, out);
}

}  // namespace dggan::pose
