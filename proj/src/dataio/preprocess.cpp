#include "dggan/dataio/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "dggan/core/errors.hpp"

namespace dggan::dataio {

Tensor resize_bilinear(const Tensor& src, int out_h, int out_w) {
  const bool has_ch = src.ndim() == 3;
  const int h = src.dim(0), w = src.dim(1), ch = has_ch ? src.dim(2) : 1;
  Tensor dst(has_ch ? std::vector<int>{out_h, out_w, ch} : std::vector<int>{out_h, out_w});
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int c = 0; c < ch; ++c) {
        const auto get = [&](int yy, int xx) {
          return has_ch ? src.at(yy, xx, c) : src.at(yy, xx);
        };
        const double v = (1 - wy) * ((1 - wx) * get(y0, x0) + wx * get(y0, x1)) +
                         wy * ((1 - wx) * get(y1, x0) + wx * get(y1, x1));
        if (has_ch)
          dst.at(y, x, c) = v;
        else
          dst.at(y, x) = v;
      }
    }
  }
  return dst;
}

namespace {

// Crop + resize via direct bilinear sampling of the source region so no
// intermediate grid is materialized; exact for identity transforms.
Tensor sample_region(const Tensor& src, const CropBox& box, int out_size) {
  const bool has_ch = src.ndim() == 3;
  const int h = src.dim(0), w = src.dim(1), ch = has_ch ? src.dim(2) : 1;
  Tensor dst(has_ch ? std::vector<int>{out_size, out_size, ch}
                    : std::vector<int>{out_size, out_size});
  const double sx = box.w / out_size;
  const double sy = box.h / out_size;
  for (int y = 0; y < out_size; ++y) {
    double fy = box.y + (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_size; ++x) {
      double fx = box.x + (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int c = 0; c < ch; ++c) {
        const auto get = [&](int yy, int xx) {
          return has_ch ? src.at(yy, xx, c) : src.at(yy, xx);
        };
        const double v = (1 - wy) * ((1 - wx) * get(y0, x0) + wx * get(y0, x1)) +
                         wy * ((1 - wx) * get(y1, x0) + wx * get(y1, x1));
        if (has_ch)
          dst.at(y, x, c) = v;
        else
          dst.at(y, x) = v;
      }
    }
  }
  return dst;
}

}  // namespace

HandSample crop_hand(const HandSample& sample, const CropBox& bbox, int out_size) {
  if (out_size <= 0) throw Error("crop_hand: out_size must be positive");
  if (bbox.w <= 0.0 || bbox.h <= 0.0) throw Error("crop_hand: empty bbox");
  const double img_w = sample.rgb.dim(1);
  const double img_h = sample.rgb.dim(0);
  if (bbox.x >= img_w || bbox.y >= img_h || bbox.x + bbox.w <= 0.0 || bbox.y + bbox.h <= 0.0)
    throw Error("crop_hand: bbox fully outside image");

  HandSample out = sample;
  const double sx = out_size / bbox.w;
  const double sy = out_size / bbox.h;

  out.rgb = sample_region(sample.rgb, bbox, out_size);
  if (sample.depth.has_value()) {
    DepthMap d = *sample.depth;
    d.values = sample_region(sample.depth->values, bbox, out_size);
    out.depth = std::move(d);
  }

  out.keypoints2d = sample.keypoints2d;
  for (int k = 0; k < sample.keypoints2d.dim(0); ++k) {
    out.keypoints2d.at(k, 0) = (sample.keypoints2d.at(k, 0) - bbox.x) * sx;
    out.keypoints2d.at(k, 1) = (sample.keypoints2d.at(k, 1) - bbox.y) * sy;
  }
  out.intrinsics.fx = sample.intrinsics.fx * sx;
  out.intrinsics.fy = sample.intrinsics.fy * sy;
  out.intrinsics.cx = (sample.intrinsics.cx - bbox.x) * sx;
  out.intrinsics.cy = (sample.intrinsics.cy - bbox.y) * sy;
  return out;
}

void palm_to_wrist(Tensor& keypoints3d, Tensor& keypoints2d, int palm_idx, int middle_mcp_idx,
                   double gamma) {
  const int k = keypoints3d.dim(0);
  if (palm_idx < 0 || palm_idx >= k || middle_mcp_idx < 0 || middle_mcp_idx >= k ||
      palm_idx == middle_mcp_idx)
    throw Error("palm_to_wrist: invalid joint indices");
  for (int c = 0; c < 3; ++c) {
    const double palm = keypoints3d.at(palm_idx, c);
    const double mcp = keypoints3d.at(middle_mcp_idx, c);
    keypoints3d.at(palm_idx, c) = palm + gamma * (palm - mcp);
  }
  for (int c = 0; c < 2; ++c) {
    const double palm = keypoints2d.at(palm_idx, c);
    const double mcp = keypoints2d.at(middle_mcp_idx, c);
    keypoints2d.at(palm_idx, c) = palm + gamma * (palm - mcp);
  }
}

HeatmapTargets make_heatmap_targets(const Tensor& keypoints2d, int h, int w, double sigma) {
  if (sigma <= 0.0) throw Error("make_heatmap_targets: sigma must be positive");
  const int k = keypoints2d.dim(0);
  HeatmapTargets out;
  out.sigma = sigma;
  out.maps = Tensor({k, h, w});
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < k; ++j) {
    const double u = keypoints2d.at(j, 0);
    const double v = keypoints2d.at(j, 1);
    // Out of bounds when the rounded pixel falls outside the grid.
    if (u < -0.5 || u >= w - 0.5 || v < -0.5 || v >= h - 0.5) continue;
    for (int y = 0; y < h; ++y) {
      const double dy = y - v;
      for (int x = 0; x < w; ++x) {
        const double dx = x - u;
        out.maps.at(j, y, x) = std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return out;
}

DepthMap normalize_depth(const DepthMap& raw) {
  if (raw.unit != DepthUnit::raw_mm) throw Error("normalize_depth: input must be raw");
  const double lo = raw.values.min_value();
  const double hi = raw.values.max_value();
  if (hi - lo <= 0.0) throw DegenerateDepthError("constant depth map cannot be normalized");
  DepthMap out;
  out.unit = DepthUnit::normalized;
  out.values = raw.values;
  const double inv = 1.0 / (hi - lo);
  for (std::int64_t i = 0; i < out.values.numel(); ++i)
    out.values[i] = (out.values[i] - lo) * inv;
  return out;
}

RelativeDepthVector relative_depths(const Tensor& keypoints3d, int root_idx, int bone_a,
                                    int bone_b) {
  const int k = keypoints3d.dim(0);
  if (root_idx < 0 || root_idx >= k || bone_a < 0 || bone_a >= k || bone_b < 0 || bone_b >= k ||
      bone_a == bone_b)
    throw Error("relative_depths: invalid joint indices");
  double l2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d = keypoints3d.at(bone_a, c) - keypoints3d.at(bone_b, c);
    l2 += d * d;
  }
  const double bone = std::sqrt(l2);
  if (bone <= 0.0) throw Error("relative_depths: zero reference bone length");
  RelativeDepthVector out;
  out.values = Tensor({k});
  const double z_root = keypoints3d.at(root_idx, 2);
  for (int j = 0; j < k; ++j) out.values[j] = (keypoints3d.at(j, 2) - z_root) / bone;
  return out;
}

DepthMap sample_unpaired_depth(const DepthPool& pool, Rng& rng) {
  if (pool.items.empty()) throw Error("sample_unpaired_depth: empty pool");
  const auto idx = rng.uniform_int(static_cast<std::int64_t>(pool.items.size()));
  const DepthMap& item = pool.items[static_cast<std::size_t>(idx)];
  if (item.unit == DepthUnit::normalized) return item;
  return normalize_depth(item);
}

}  // namespace dggan::dataio
