#include "dggan/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dggan/core/errors.hpp"

namespace dggan::eval {

MetricsReport build_report(const std::vector<double>& all_joint_errors, std::int64_t sample_count,
                           std::int64_t flagged_count) {
  MetricsReport r;
  r.sample_count = sample_count;
  r.flagged_count = flagged_count;
  if (!all_joint_errors.empty()) {
    double sum = 0.0;
    for (double e : all_joint_errors) sum += e;
    r.epe_mean_mm = sum / static_cast<double>(all_joint_errors.size());
    std::vector<double> sorted = all_joint_errors;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    r.epe_median_mm = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    r.pck = pck_curve(all_joint_errors, default_pck_thresholds());
    r.auc_20_50 = eval::auc_20_50(pck_curve_exact(all_joint_errors));
  }
  return r;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw IoError("emit_report: cannot create " + out_dir.string());

  {
    std::ofstream os(out_dir / "summary.csv");
    if (!os) throw IoError("emit_report: cannot write summary.csv");
    char line[160];
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%lld", report.auc_20_50,
                  report.epe_mean_mm, report.epe_median_mm,
                  static_cast<long long>(report.sample_count));
    os << "auc_20_50,epe_mean_mm,epe_median_mm,n\n" << line << "\n";
  }
  {
    std::ofstream os(out_dir / "curve.csv");
    if (!os) throw IoError("emit_report: cannot write curve.csv");
    os << "threshold_mm,pck\n";
    char line[80];
    for (const auto& [t, f] : report.pck) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g", t, f);
      os << line << "\n";
    }
  }
  {
    // Root depth and reference bone length come from ground truth at eval
    // time; that protocol choice is recorded alongside the numbers.
    nlohmann::json meta = {
        {"alignment", "ground-truth root depth and reference bone length"},
        {"flagged_samples", report.flagged_count},
        {"pck_thresholds", "31 points, 1 mm spacing, [20, 50]"},
    };
    std::ofstream os(out_dir / "report_meta.json");
    if (!os) throw IoError("emit_report: cannot write report_meta.json");
    os << meta.dump(2) << "\n";
  }
}

MetricsReport parse_report(const std::filesystem::path& out_dir) {
  MetricsReport r;
  {
    std::ifstream is(out_dir / "summary.csv");
    if (!is) throw IoError("parse_report: missing summary.csv in " + out_dir.string());
    std::string header, line;
    std::getline(is, header);
    if (header != "auc_20_50,epe_mean_mm,epe_median_mm,n")
      throw IoError("parse_report: unexpected summary header '" + header + "'");
    std::getline(is, line);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    if (!(ls >> r.auc_20_50 >> r.epe_mean_mm >> r.epe_median_mm >> r.sample_count))
      throw IoError("parse_report: bad summary row");
  }
  {
    std::ifstream is(out_dir / "curve.csv");
    if (!is) throw IoError("parse_report: missing curve.csv");
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double t, f;
      if (!(ls >> t >> f)) throw IoError("parse_report: bad curve row");
      r.pck.emplace_back(t, f);
    }
  }
  {
    std::ifstream is(out_dir / "report_meta.json");
    if (is) {
      nlohmann::json meta;
      is >> meta;
      r.flagged_count = meta.value("flagged_samples", static_cast<std::int64_t>(0));
    }
  }
  return r;
}

}  // namespace dggan::eval
