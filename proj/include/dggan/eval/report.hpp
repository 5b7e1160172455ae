#pragma once

#include <filesystem>

#include "dggan/eval/metrics.hpp"

namespace dggan::eval {

struct MetricsReport {
  double epe_mean_mm = 0.0;
  double epe_median_mm = 0.0;
  PckCurve pck;  // sampled at the default 31 integer-mm thresholds
  double auc_20_50 = 0.0;
  std::int64_t sample_count = 0;
  std::int64_t flagged_count = 0;  // samples excluded for non-positive depth
};

// Builds a report from pooled per-joint errors (mm) across all samples.
MetricsReport build_report(const std::vector<double>& all_joint_errors, std::int64_t sample_count,
                           std::int64_t flagged_count);

// Writes summary.csv (auc_20_50, epe_mean_mm, epe_median_mm, n), curve.csv
// (threshold_mm, pck) and report_meta.json (protocol notes, flagged count).
void emit_report(const MetricsReport& report, const std::filesystem::path& out_dir);

MetricsReport parse_report(const std::filesystem::path& out_dir);

}  // namespace dggan::eval
