#pragma once

#include "dggan/core/tensor.hpp"
#include "dggan/dataio/types.hpp"

namespace dggan::eval {

struct Reconstruction {
  Tensor keypoints3d;  // [K,3] mm
  bool valid = true;   // false when some z_k <= 0 (sample flagged)
};

// Lifts 2D keypoints and relative depths to camera-frame 3D using a known
// root depth and reference bone length:
//   z_k = root_depth + Z_k * bone_length
//   x_k = (u_k - cx) * z_k / fx,  y_k = (v_k - cy) * z_k / fy
Reconstruction reconstruct_3d(const Tensor& keypoints2d, const Tensor& relative_depths,
                              const dataio::CameraIntrinsics& intrinsics, double root_depth_mm,
                              double bone_length_mm);

}  // namespace dggan::eval
