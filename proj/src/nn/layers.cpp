#include "dggan/nn/layers.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

#include "dggan/core/errors.hpp"
#include "dggan/nn/ops.hpp"

namespace dggan::nn {

void init_he_normal(Tensor& t, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0.0, stddev);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng)
    : weight(Tensor({out_ch, in_ch, ksize, ksize})),
      bias(Tensor({out_ch})),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(ksize),
      stride_(stride),
      pad_(pad) {
  init_he_normal(weight.value, in_ch * ksize * ksize, rng);
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.ndim() != 4 || x.dim(1) != in_ch_)
    throw ShapeError("Conv2d: expected [B," + std::to_string(in_ch_) + ",H,W] input");
  input_ = x;
  const int bsz = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = conv_out_size(h, k_, stride_, pad_);
  const int ow = conv_out_size(w, k_, stride_, pad_);
  const int rows = in_ch_ * k_ * k_;
  const int ocount = oh * ow;
  Tensor y({bsz, out_ch_, oh, ow});
  std::vector<double> cols(static_cast<std::size_t>(rows) * ocount);
  for (int n = 0; n < bsz; ++n) {
    im2col(x.data() + static_cast<std::size_t>(n) * in_ch_ * h * w, in_ch_, h, w, k_, stride_,
           pad_, oh, ow, cols.data());
    double* yn = y.data() + static_cast<std::size_t>(n) * out_ch_ * ocount;
    gemm(weight.value.data(), cols.data(), yn, out_ch_, rows, ocount, false);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double b = bias.value[oc];
      double* p = yn + static_cast<std::size_t>(oc) * ocount;
      for (int i = 0; i < ocount; ++i) p[i] += b;
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  const int bsz = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
  const int oh = gy.dim(2), ow = gy.dim(3);
  const int rows = in_ch_ * k_ * k_;
  const int ocount = oh * ow;
  Tensor gx({bsz, in_ch_, h, w});
  std::vector<double> cols(static_cast<std::size_t>(rows) * ocount);
  std::vector<double> dcols(static_cast<std::size_t>(rows) * ocount);
  for (int n = 0; n < bsz; ++n) {
    const double* gyn = gy.data() + static_cast<std::size_t>(n) * out_ch_ * ocount;
    im2col(input_.data() + static_cast<std::size_t>(n) * in_ch_ * h * w, in_ch_, h, w, k_,
           stride_, pad_, oh, ow, cols.data());
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double* g = gyn + static_cast<std::size_t>(oc) * ocount;
      double gsum = 0.0;
      for (int i = 0; i < ocount; ++i) gsum += g[i];
      bias.grad[oc] += gsum;
    }
    // dW (OC x rows) += gy_n (OC x ocount) * cols^T
    gemm_nt(gyn, cols.data(), weight.grad.data(), out_ch_, ocount, rows, true);
    // dcols (rows x ocount) = W^T * gy_n
    gemm_tn(weight.value.data(), gyn, dcols.data(), rows, out_ch_, ocount, false);
    col2im(dcols.data(), in_ch_, h, w, k_, stride_, pad_, oh, ow,
           gx.data() + static_cast<std::size_t>(n) * in_ch_ * h * w);
  }
  return gx;
}

void Conv2d::collect(const std::string& prefix, NamedParams& out) {
  out.emplace_back(prefix + ".weight", &weight);
  out.emplace_back(prefix + ".bias", &bias);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng)
    : weight(Tensor({in_ch, out_ch, ksize, ksize})),
      bias(Tensor({out_ch})),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(ksize),
      stride_(stride),
      pad_(pad) {
  init_he_normal(weight.value, in_ch * ksize * ksize, rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
  if (x.ndim() != 4 || x.dim(1) != in_ch_)
    throw ShapeError("ConvTranspose2d: expected [B," + std::to_string(in_ch_) + ",H,W] input");
  input_ = x;
  const int bsz = x.dim(0), ih = x.dim(2), iw = x.dim(3);
  const int oh = conv_transpose_out_size(ih, k_, stride_, pad_);
  const int ow = conv_transpose_out_size(iw, k_, stride_, pad_);
  const int rows = out_ch_ * k_ * k_;
  const int icount = ih * iw;
  Tensor y({bsz, out_ch_, oh, ow});
  std::vector<double> cols(static_cast<std::size_t>(rows) * icount);
  for (int n = 0; n < bsz; ++n) {
    const double* xn = x.data() + static_cast<std::size_t>(n) * in_ch_ * icount;
    // weight viewed as [in_ch, rows]; cols = W^T * x_n
    gemm_tn(weight.value.data(), xn, cols.data(), rows, in_ch_, icount, false);
    double* yn = y.data() + static_cast<std::size_t>(n) * out_ch_ * oh * ow;
    col2im(cols.data(), out_ch_, oh, ow, k_, stride_, pad_, ih, iw, yn);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double b = bias.value[oc];
      double* p = yn + static_cast<std::size_t>(oc) * oh * ow;
      for (int i = 0; i < oh * ow; ++i) p[i] += b;
    }
  }
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
  const int bsz = input_.dim(0), ih = input_.dim(2), iw = input_.dim(3);
  const int oh = gy.dim(2), ow = gy.dim(3);
  const int rows = out_ch_ * k_ * k_;
  const int icount = ih * iw;
  Tensor gx({bsz, in_ch_, ih, iw});
  std::vector<double> cols(static_cast<std::size_t>(rows) * icount);
  for (int n = 0; n < bsz; ++n) {
    const double* gyn = gy.data() + static_cast<std::size_t>(n) * out_ch_ * oh * ow;
    const double* xn = input_.data() + static_cast<std::size_t>(n) * in_ch_ * icount;
    // cols = im2col(gy_n) with the forward's (k, stride, pad) geometry.
    im2col(gyn, out_ch_, oh, ow, k_, stride_, pad_, ih, iw, cols.data());
    // gx_n (C x icount) = W (C x rows) * cols (rows x icount)
    gemm(weight.value.data(), cols.data(),
         gx.data() + static_cast<std::size_t>(n) * in_ch_ * icount, in_ch_, rows, icount, false);
    // dW (C x rows) += x_n (C x icount) * cols^T
    gemm_nt(xn, cols.data(), weight.grad.data(), in_ch_, icount, rows, true);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double* g = gyn + static_cast<std::size_t>(oc) * oh * ow;
      double s = 0.0;
      for (int i = 0; i < oh * ow; ++i) s += g[i];
      bias.grad[oc] += s;
    }
  }
  return gx;
}

void ConvTranspose2d::collect(const std::string& prefix, NamedParams& out) {
  out.emplace_back(prefix + ".weight", &weight);
  out.emplace_back(prefix + ".bias", &bias);
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_features, int out_features, Rng& rng)
    : weight(Tensor({out_features, in_features})),
      bias(Tensor({out_features})),
      in_(in_features),
      out_(out_features) {
  init_he_normal(weight.value, in_features, rng);
}

Tensor Linear::forward(const Tensor& x) {
  if (x.ndim() != 2 || x.dim(1) != in_)
    throw ShapeError("Linear: expected [B," + std::to_string(in_) + "] input");
  input_ = x;
  const int bsz = x.dim(0);
  Tensor y({bsz, out_});
  // y = x (B x in) * W^T (out x in)^T
  gemm_nt(x.data(), weight.value.data(), y.data(), bsz, in_, out_, false);
  for (int n = 0; n < bsz; ++n)
    for (int o = 0; o < out_; ++o) y.at(n, o) += bias.value[o];
  return y;
}

Tensor Linear::backward(const Tensor& gy) {
  const int bsz = input_.dim(0);
  Tensor gx({bsz, in_});
  // gx = gy (B x out) * W (out x in)
  gemm(gy.data(), weight.value.data(), gx.data(), bsz, out_, in_, false);
  // dW (out x in) += gy^T * x
  gemm_tn(gy.data(), input_.data(), weight.grad.data(), out_, bsz, in_, true);
  for (int n = 0; n < bsz; ++n)
    for (int o = 0; o < out_; ++o) bias.grad[o] += gy.at(n, o);
  return gx;
}

void Linear::collect(const std::string& prefix, NamedParams& out) {
  out.emplace_back(prefix + ".weight", &weight);
  out.emplace_back(prefix + ".bias", &bias);
}

// ---------------------------------------------------------------------------
// Activations / pooling

Tensor ReLU::forward(const Tensor& x) {
  input_ = x;
  Tensor y = x;
  for (std::int64_t i = 0; i < y.numel(); ++i)
    if (y[i] < 0.0) y[i] = 0.0;
  return y;
}

Tensor ReLU::backward(const Tensor& gy) {
  Tensor gx = gy;
  for (std::int64_t i = 0; i < gx.numel(); ++i)
    if (input_[i] <= 0.0) gx[i] = 0.0;
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
  Tensor y = x;
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
  output_ = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& gy) {
  Tensor gx = gy;
  for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] *= output_[i] * (1.0 - output_[i]);
  return gx;
}

Tensor GlobalAvgPool2d::forward(const Tensor& x) {
  in_shape_ = x.shape();
  const int bsz = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor y({bsz, c});
  for (int n = 0; n < bsz; ++n)
    for (int ch = 0; ch < c; ++ch) {
      const double* p = x.data() + (static_cast<std::size_t>(n) * c + ch) * plane;
      double s = 0.0;
      for (int i = 0; i < plane; ++i) s += p[i];
      y.at(n, ch) = s / plane;
    }
  return y;
}

Tensor GlobalAvgPool2d::backward(const Tensor& gy) {
  Tensor gx(in_shape_);
  const int bsz = in_shape_[0], c = in_shape_[1], plane = in_shape_[2] * in_shape_[3];
  for (int n = 0; n < bsz; ++n)
    for (int ch = 0; ch < c; ++ch) {
      const double g = gy.at(n, ch) / plane;
      double* p = gx.data() + (static_cast<std::size_t>(n) * c + ch) * plane;
      for (int i = 0; i < plane; ++i) p[i] = g;
    }
  return gx;
}

// ---------------------------------------------------------------------------
// ResidualBlock

ResidualBlock::ResidualBlock(int channels, Rng& rng)
    : conv1_(channels, channels, 3, 1, 1, rng), conv2_(channels, channels, 3, 1, 1, rng) {}

Tensor ResidualBlock::forward(const Tensor& x) {
  Tensor y = conv2_.forward(relu_.forward(conv1_.forward(x)));
  y += x;
  return y;
}

Tensor ResidualBlock::backward(const Tensor& gy) {
  Tensor g = conv1_.backward(relu_.backward(conv2_.backward(gy)));
  g += gy;
  return g;
}

void ResidualBlock::collect(const std::string& prefix, NamedParams& out) {
  conv1_.collect(prefix + ".conv1", out);
  conv2_.collect(prefix + ".conv2", out);
}

}  // namespace dggan::nn
