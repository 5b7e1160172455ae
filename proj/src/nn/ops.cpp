#include "dggan/nn/ops.hpp"

#include <Eigen/Core>
#include <cassert>
#include <cstring>

namespace dggan::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void gemm(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  ConstMapMat ma(a, m, k);
  ConstMapMat mb(b, k, n);
  MapMat mc(c, m, n);
  if (accumulate) {
    mc.noalias() += ma * mb;
  } else {
    mc.noalias() = ma * mb;
  }
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  ConstMapMat ma(a, m, k);
  ConstMapMat mb(b, n, k);
  MapMat mc(c, m, n);
  if (accumulate) {
    mc.noalias() += ma * mb.transpose();
  } else {
    mc.noalias() = ma * mb.transpose();
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  ConstMapMat ma(a, k, m);
  ConstMapMat mb(b, k, n);
  MapMat mc(c, m, n);
  if (accumulate) {
    mc.noalias() += ma.transpose() * mb;
  } else {
    mc.noalias() = ma.transpose() * mb;
  }
}

void im2col(const double* x, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* cols) {
  const int plane = h * w;
  const int ocount = oh * ow;
  for (int c = 0; c < channels; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + (static_cast<std::size_t>((c * k + ky) * k + kx)) * ocount;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          double* dst = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::memset(dst, 0, sizeof(double) * static_cast<std::size_t>(ow));
            continue;
          }
          const double* src = xc + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad, int oh,
            int ow, double* x) {
  const int plane = h * w;
  const int ocount = oh * ow;
  for (int c = 0; c < channels; ++c) {
    double* xc = x + static_cast<std::size_t>(c) * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + (static_cast<std::size_t>((c * k + ky) * k + kx)) * ocount;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * ow;
          double* dst = xc + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  assert(a.ndim() == 4 && b.ndim() == 4);
  const int bsz = a.dim(0), c1 = a.dim(1), c2 = b.dim(1), h = a.dim(2), w = a.dim(3);
  assert(b.dim(0) == bsz && b.dim(2) == h && b.dim(3) == w);
  Tensor out({bsz, c1 + c2, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int n = 0; n < bsz; ++n) {
    std::memcpy(out.data() + (static_cast<std::size_t>(n) * (c1 + c2)) * plane,
                a.data() + (static_cast<std::size_t>(n) * c1) * plane,
                sizeof(double) * c1 * plane);
    std::memcpy(out.data() + (static_cast<std::size_t>(n) * (c1 + c2) + c1) * plane,
                b.data() + (static_cast<std::size_t>(n) * c2) * plane,
                sizeof(double) * c2 * plane);
  }
  return out;
}

void split_channels(const Tensor& g, int c1, Tensor& ga, Tensor& gb) {
  const int bsz = g.dim(0), c = g.dim(1), h = g.dim(2), w = g.dim(3);
  const int c2 = c - c1;
  ga = Tensor({bsz, c1, h, w});
  gb = Tensor({bsz, c2, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int n = 0; n < bsz; ++n) {
    std::memcpy(ga.data() + (static_cast<std::size_t>(n) * c1) * plane,
                g.data() + (static_cast<std::size_t>(n) * c) * plane, sizeof(double) * c1 * plane);
    std::memcpy(gb.data() + (static_cast<std::size_t>(n) * c2) * plane,
                g.data() + (static_cast<std::size_t>(n) * c + c1) * plane,
                sizeof(double) * c2 * plane);
  }
}

}  // namespace dggan::nn
