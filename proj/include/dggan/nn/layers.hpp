#pragma once

#include "dggan/core/rng.hpp"
#include "dggan/nn/module.hpp"

namespace dggan::nn {

// He-style normal init, std = sqrt(2 / fan_in).
void init_he_normal(Tensor& t, int fan_in, Rng& rng);

class Conv2d : public Module {
 public:
  Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng);

  Tensor forward(const Tensor& x) override;   // [B,C,H,W] -> [B,OC,OH,OW]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, NamedParams& out) override;

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  Param weight;  // [OC, C, k, k]
  Param bias;    // [OC]

 private:
  int in_ch_, out_ch_, k_, stride_, pad_;
  Tensor input_;
};

class ConvTranspose2d : public Module {
 public:
  ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng);

  Tensor forward(const Tensor& x) override;   // [B,C,IH,IW] -> [B,OC,OH,OW]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, NamedParams& out) override;

  Param weight;  // [C, OC, k, k]
  Param bias;    // [OC]

 private:
  int in_ch_, out_ch_, k_, stride_, pad_;
  Tensor input_;
};

class Linear : public Module {
 public:
  Linear(int in_features, int out_features, Rng& rng);

  Tensor forward(const Tensor& x) override;   // [B,in] -> [B,out]
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, NamedParams& out) override;

  Param weight;  // [out, in]
  Param bias;    // [out]

 private:
  int in_, out_;
  Tensor input_;
};

class ReLU : public Module {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string&, NamedParams&) override {}

 private:
  Tensor input_;
};

class Sigmoid : public Module {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string&, NamedParams&) override {}

 private:
  Tensor output_;
};

// [B,C,H,W] -> [B,C]
class GlobalAvgPool2d : public Module {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string&, NamedParams&) override {}

 private:
  std::vector<int> in_shape_;
};

// y = x + conv(relu(conv(x))), 3x3 kernels, channel-preserving.
class ResidualBlock : public Module {
 public:
  ResidualBlock(int channels, Rng& rng);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(const std::string& prefix, NamedParams& out) override;

 private:
  Conv2d conv1_, conv2_;
  ReLU relu_;
};

}  // namespace dggan::nn
