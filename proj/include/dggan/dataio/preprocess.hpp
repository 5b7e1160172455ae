#pragma once

#include "dggan/core/rng.hpp"
#include "dggan/dataio/types.hpp"

namespace dggan::dataio {

// Axis-aligned crop region in source pixel units. Fractional boxes are
// allowed so crops compose exactly.
struct CropBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Crops and resizes to out_size x out_size, remapping keypoints and
// intrinsics by the same affine transform. Depth, when present, is resampled
// identically.
HandSample crop_hand(const HandSample& sample, const CropBox& bbox, int out_size);

// Moves keypoint[palm_idx] to palm + gamma * (palm - middle_mcp), in 3D and
// 2D consistently. Returns the remapped pair (3D, 2D).
void palm_to_wrist(Tensor& keypoints3d, Tensor& keypoints2d, int palm_idx, int middle_mcp_idx,
                   double gamma);

// Unnormalized Gaussian per joint, peak 1 at the keypoint. Keypoints are in
// heatmap pixel units; out-of-bounds joints produce all-zero maps.
HeatmapTargets make_heatmap_targets(const Tensor& keypoints2d, int h, int w, double sigma);

// Min-max normalization to [0,1]; throws DegenerateDepthError on a constant
// map.
DepthMap normalize_depth(const DepthMap& raw);

// Z_k = (z_k - z_root) / |kp3d[bone_a] - kp3d[bone_b]|.
RelativeDepthVector relative_depths(const Tensor& keypoints3d, int root_idx, int bone_a,
                                    int bone_b);

// Uniform draw from the pool; raw members are normalized on the way out.
DepthMap sample_unpaired_depth(const DepthPool& pool, Rng& rng);

// Bilinear resample of a [H,W] or [H,W,C] grid to out_h x out_w. Sampling is
// cell-centered: dst pixel (x,y) reads src ((x+0.5)*sx-0.5, (y+0.5)*sy-0.5).
Tensor resize_bilinear(const Tensor& src, int out_h, int out_w);

// Image <-> heatmap coordinate mapping (cell-centered).
inline double image_to_heatmap(double u_img, int img_size, int hm_size) {
  return u_img * (static_cast<double>(hm_size) / img_size) - 0.5;
}
inline double heatmap_to_image(double u_hm, int img_size, int hm_size) {
  return (u_hm + 0.5) * (static_cast<double>(img_size) / hm_size);
}

}  // namespace dggan::dataio
