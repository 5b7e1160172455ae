#include "dggan/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "dggan/core/errors.hpp"

namespace dggan::eval {

Tensor decode_2d(const Tensor& heatmaps, int image_w, int image_h) {
  if (heatmaps.ndim() != 3) throw ShapeError("decode_2d: expected [K,h,w]");
  const int k = heatmaps.dim(0), h = heatmaps.dim(1), w = heatmaps.dim(2);
  if (h < 1 || w < 1) throw ShapeError("decode_2d: empty heatmap");
  Tensor out({k, 2});
  for (int j = 0; j < k; ++j) {
    int best_y = 0, best_x = 0;
    double best = heatmaps.at(j, 0, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = heatmaps.at(j, y, x);
        if (v > best) {
          best = v;
          best_y = y;
          best_x = x;
        }
      }
    out.at(j, 0) = (best_x + 0.5) * (static_cast<double>(image_w) / w);
    out.at(j, 1) = (best_y + 0.5) * (static_cast<double>(image_h) / h);
  }
  return out;
}

EpeResult epe(const Tensor& pred_kp3d, const Tensor& gt_kp3d) {
  if (pred_kp3d.ndim() != 2 || gt_kp3d.ndim() != 2 || pred_kp3d.dim(0) != gt_kp3d.dim(0) ||
      pred_kp3d.dim(1) != 3 || gt_kp3d.dim(1) != 3)
    throw ShapeError("epe: expected matching [K,3] tensors");
  EpeResult r;
  const int k = pred_kp3d.dim(0);
  r.per_joint.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = pred_kp3d.at(j, c) - gt_kp3d.at(j, c);
      s += d * d;
    }
    r.per_joint.push_back(std::sqrt(s));
  }
  double sum = 0.0;
  for (double d : r.per_joint) sum += d;
  r.mean = sum / k;
  std::vector<double> sorted = r.per_joint;
  std::sort(sorted.begin(), sorted.end());
  r.median = (k % 2 == 1) ? sorted[static_cast<std::size_t>(k / 2)]
                          : 0.5 * (sorted[static_cast<std::size_t>(k / 2 - 1)] +
                                   sorted[static_cast<std::size_t>(k / 2)]);
  return r;
}

PckCurve pck_curve(const std::vector<double>& errors, const std::vector<double>& thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] < thresholds[i - 1])
      throw Error("pck_curve: thresholds must be sorted ascending");
  PckCurve curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t count = 0;
    for (double e : errors)
      if (e <= t) ++count;
    curve.emplace_back(t, errors.empty() ? 0.0 : static_cast<double>(count) / errors.size());
  }
  return curve;
}

std::vector<double> default_pck_thresholds() {
  std::vector<double> t;
  for (int mm = 20; mm <= 50; ++mm) t.push_back(static_cast<double>(mm));
  return t;
}

PckCurve pck_curve_exact(const std::vector<double>& errors, double lo, double hi) {
  const auto frac_le = [&](double t) {
    std::size_t count = 0;
    for (double e : errors)
      if (e <= t) ++count;
    return errors.empty() ? 0.0 : static_cast<double>(count) / errors.size();
  };
  const auto frac_lt = [&](double t) {
    std::size_t count = 0;
    for (double e : errors)
      if (e < t) ++count;
    return errors.empty() ? 0.0 : static_cast<double>(count) / errors.size();
  };
  std::set<double> grid;
  for (double mm = std::ceil(lo); mm <= hi; mm += 1.0) grid.insert(mm);
  grid.insert(lo);
  grid.insert(hi);
  // Every distinct error value inside the window is a breakpoint of the step
  // function; anchoring the grid there makes the trapezoid integral exact.
  for (double e : errors)
    if (e > lo && e < hi) grid.insert(e);
  PckCurve curve;
  curve.emplace_back(lo, frac_le(lo));
  for (double t : grid) {
    if (t <= lo) continue;
    // Left limit first, then the value: duplicated thresholds give the
    // trapezoid a zero-width interval at each jump.
    const double left = frac_lt(t);
    const double val = frac_le(t);
    if (val != left) curve.emplace_back(t, left);
    curve.emplace_back(t, val);
  }
  return curve;
}

double auc_20_50(const PckCurve& curve) {
  constexpr double lo = 20.0, hi = 50.0;
  if (curve.size() < 2) throw Error("auc_20_50: need at least two curve points");
  bool has_lo = false, has_hi = false;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0 && curve[i].first < curve[i - 1].first)
      throw Error("auc_20_50: curve thresholds must be sorted");
    if (curve[i].first == lo) has_lo = true;
    if (curve[i].first == hi) has_hi = true;
  }
  if (!has_lo || !has_hi || curve.front().first > lo || curve.back().first < hi)
    throw Error("auc_20_50: curve must cover [20, 50] including both endpoints");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double t0 = std::clamp(curve[i - 1].first, lo, hi);
    const double t1 = std::clamp(curve[i].first, lo, hi);
    if (t1 <= t0) continue;
    // Interpolate at clamped endpoints if the segment sticks out of range.
    const double dt = curve[i].first - curve[i - 1].first;
    const auto value_at = [&](double t) {
      if (dt == 0.0) return curve[i].second;
      const double a = (t - curve[i - 1].first) / dt;
      return curve[i - 1].second + a * (curve[i].second - curve[i - 1].second);
    };
    area += 0.5 * (value_at(t0) + value_at(t1)) * (t1 - t0);
  }
  return area / (hi - lo);
}

double percent_reduction(double before, double after) {
  if (before <= 0.0) throw Error("percent_reduction: before must be positive");
  return 100.0 * (before - after) / before;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", percent);
  return buf;
}

}  // namespace dggan::eval
