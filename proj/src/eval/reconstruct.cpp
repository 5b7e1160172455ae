#include "dggan/eval/reconstruct.hpp"

#include "dggan/core/errors.hpp"

namespace dggan::eval {

Reconstruction reconstruct_3d(const Tensor& keypoints2d, const Tensor& relative_depths,
                              const dataio::CameraIntrinsics& intrinsics, double root_depth_mm,
                              double bone_length_mm) {
  if (bone_length_mm <= 0.0) throw Error("reconstruct_3d: bone length must be positive");
  const int k = keypoints2d.dim(0);
  if (relative_depths.numel() != k) throw ShapeError("reconstruct_3d: K mismatch");
  Reconstruction r;
  r.keypoints3d = Tensor({k, 3});
  for (int j = 0; j < k; ++j) {
    const double z = root_depth_mm + relative_depths[j] * bone_length_mm;
    if (z <= 0.0) r.valid = false;
    r.keypoints3d.at(j, 0) = (keypoints2d.at(j, 0) - intrinsics.cx) * z / intrinsics.fx;
    r.keypoints3d.at(j, 1) = (keypoints2d.at(j, 1) - intrinsics.cy) * z / intrinsics.fy;
    r.keypoints3d.at(j, 2) = z;
  }
  return r;
}

}  // namespace dggan::eval
