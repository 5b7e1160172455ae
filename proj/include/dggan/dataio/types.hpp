#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dggan/core/tensor.hpp"

namespace dggan::dataio {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  // Pinhole projection, camera frame (mm) -> pixel coordinates.
  void project(double x, double y, double z, double& u, double& v) const {
    u = fx * x / z + cx;
    v = fy * y / z + cy;
  }
};

enum class DepthUnit { raw_mm, normalized };

struct DepthMap {
  Tensor values;  // [h, w]
  DepthUnit unit = DepthUnit::raw_mm;

  int height() const { return values.dim(0); }
  int width() const { return values.dim(1); }
};

enum class HandSide { left, right };

inline const char* to_string(HandSide s) { return s == HandSide::left ? "left" : "right"; }

// One training/eval record. Keypoint count K is constant per dataset
// configuration (default 21: wrist + 4 joints x 5 fingers).
struct HandSample {
  Tensor rgb;          // [H, W, 3], values in [0,1]
  Tensor keypoints2d;  // [K, 2] pixel (u, v)
  Tensor keypoints3d;  // [K, 3] camera-frame mm
  CameraIntrinsics intrinsics;
  std::optional<DepthMap> depth;  // raw mm when present
  HandSide hand_side = HandSide::right;
  std::string source_id;

  int k() const { return keypoints2d.dim(0); }
  int height() const { return rgb.dim(0); }
  int width() const { return rgb.dim(1); }
};

// Gaussian 2D confidence targets, one map per joint.
struct HeatmapTargets {
  Tensor maps;  // [K, h, w]
  double sigma = 1.0;
};

struct RelativeDepthVector {
  Tensor values;  // [K]
};

struct DepthPool {
  std::vector<DepthMap> items;
  std::string origin;
};

// Default 21-joint tree: 0 = wrist, then 4 joints (MCP, PIP, DIP, TIP) for
// thumb, index, middle, ring, pinky in that order.
inline constexpr int kDefaultJointCount = 21;
inline constexpr int kWristIndex = 0;
inline constexpr int kMiddleMcpIndex = 9;

}  // namespace dggan::dataio
