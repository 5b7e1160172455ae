#include "dggan/gan/nets.hpp"

#include "dggan/core/errors.hpp"

namespace dggan::gan {

GeneratorNet::GeneratorNet(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.in_size % 16 != 0) throw ConfigError("generator in_size must be divisible by 16");
  const int w = cfg.base_channels;
  const int widths[5] = {3, w, 2 * w, 4 * w, 4 * w};
  for (int i = 0; i < 4; ++i) {
    body_.emplace<nn::Conv2d>("enc" + std::to_string(i), widths[i], widths[i + 1], 4, 2, 1, rng);
    body_.emplace<nn::ReLU>("enc" + std::to_string(i) + "_relu");
  }
  for (int i = 0; i < cfg.residual_blocks; ++i)
    body_.emplace<nn::ResidualBlock>("res" + std::to_string(i), 4 * w, rng);
  const int dec_widths[5] = {4 * w, 4 * w, 2 * w, w, w};
  for (int i = 0; i < 4; ++i) {
    body_.emplace<nn::ConvTranspose2d>("dec" + std::to_string(i), dec_widths[i], dec_widths[i + 1],
                                       4, 2, 1, rng);
    body_.emplace<nn::ReLU>("dec" + std::to_string(i) + "_relu");
  }
  body_.emplace<nn::Conv2d>("head", w, 1, 1, 1, 0, rng);
  body_.emplace<nn::Sigmoid>("squash");
}

Tensor GeneratorNet::forward(const Tensor& rgb) {
  if (rgb.ndim() != 4 || rgb.dim(1) != 3 || rgb.dim(2) != cfg_.in_size ||
      rgb.dim(3) != cfg_.in_size)
    throw ShapeError("generator_forward: expected [B,3," + std::to_string(cfg_.in_size) + "," +
                     std::to_string(cfg_.in_size) + "] input");
  return body_.forward(rgb);
}

Tensor GeneratorNet::backward(const Tensor& gy) { return body_.backward(gy); }

void GeneratorNet::collect(const std::string& prefix, nn::NamedParams& out) {
  body_.collect(prefix.empty() ? "generator" : prefix, out);
}

DiscriminatorNet::DiscriminatorNet(const DiscriminatorConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.in_size % 16 != 0) throw ConfigError("discriminator in_size must be divisible by 16");
  const int w = cfg.base_channels;
  const int widths[5] = {1, w, 2 * w, 4 * w, 4 * w};
  for (int i = 0; i < 4; ++i) {
    body_.emplace<nn::Conv2d>("conv" + std::to_string(i), widths[i], widths[i + 1], 4, 2, 1, rng);
    body_.emplace<nn::ReLU>("conv" + std::to_string(i) + "_relu");
  }
  body_.emplace<nn::GlobalAvgPool2d>("pool");
  body_.emplace<nn::Linear>("head", 4 * w, 1, rng);
  body_.emplace<nn::Sigmoid>("squash");
}

Tensor DiscriminatorNet::forward(const Tensor& depth) {
  if (depth.ndim() != 4 || depth.dim(1) != 1 || depth.dim(2) != cfg_.in_size ||
      depth.dim(3) != cfg_.in_size)
    throw ShapeError("discriminator_forward: expected [B,1," + std::to_string(cfg_.in_size) + "," +
                     std::to_string(cfg_.in_size) + "] input");
  Tensor scores = body_.forward(depth);  // [B,1]
  return scores.reshaped({depth.dim(0)});
}

Tensor DiscriminatorNet::backward(const Tensor& gy) {
  return body_.backward(gy.reshaped({gy.dim(0), 1}));
}

void DiscriminatorNet::collect(const std::string& prefix, nn::NamedParams& out) {
  body_.collect(prefix.empty() ? "discriminator" : prefix, out);
}

}  // namespace dggan::gan
