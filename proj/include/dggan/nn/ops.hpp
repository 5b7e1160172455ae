#pragma once

#include <vector>

#include "dggan/core/tensor.hpp"

namespace dggan::nn {

// C(m x n) = A(m x k) * B(k x n), row-major buffers. accumulate adds into C.
void gemm(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// C(m x n) = A(m x k) * B(n x k)^T
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// C(m x n) = A(k x m)^T * B(k x n)
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// x: [C, H, W] -> cols: [C*kh*kw, oh*ow] for a (k, stride, pad) convolution.
void im2col(const double* x, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* cols);

// Inverse scatter-add of im2col: cols -> x (accumulates into x).
void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* x);

inline int conv_out_size(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

inline int conv_transpose_out_size(int in, int k, int stride, int pad) {
  return (in - 1) * stride - 2 * pad + k;
}

// Channel-wise concat of [B,C1,H,W] and [B,C2,H,W].
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Splits grad of concat_channels back into the two parts.
void split_channels(const Tensor& g, int c1, Tensor& ga, Tensor& gb);

}  // namespace dggan::nn
