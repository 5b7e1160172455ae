#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dggan/core/tensor.hpp"

namespace dggan::eval {

// Argmax decoding of final-stage heatmaps [K,h,w] to image-pixel coordinates
// [K,2], center-of-cell scaling, ties broken by row-major first occurrence.
Tensor decode_2d(const Tensor& heatmaps, int image_w, int image_h);

struct EpeResult {
  std::vector<double> per_joint;  // mm
  double mean = 0.0;
  double median = 0.0;
};

EpeResult epe(const Tensor& pred_kp3d, const Tensor& gt_kp3d);

using PckCurve = std::vector<std::pair<double, double>>;  // (threshold mm, fraction)

// Fraction of errors <= t for each threshold (thresholds sorted ascending).
PckCurve pck_curve(const std::vector<double>& errors, const std::vector<double>& thresholds);

// Exact step-function representation of the PCK curve on [lo, hi]: the
// default integer-mm grid plus a left-limit/value point pair at every jump,
// so the trapezoidal AUC equals the analytic step integral.
PckCurve pck_curve_exact(const std::vector<double>& errors, double lo = 20.0, double hi = 50.0);

// Default threshold grid: 31 integer-mm points on [20, 50].
std::vector<double> default_pck_thresholds();

// Trapezoidal integral of the curve over [20, 50], normalized by 30.
// Requires the curve to cover [20, 50] with at least two points including
// both endpoints.
double auc_20_50(const PckCurve& curve);

// 100 * (before - after) / before.
double percent_reduction(double before, double after);

// Rounded to one decimal, e.g. "16.5".
std::string format_percent(double percent);

}  // namespace dggan::eval
