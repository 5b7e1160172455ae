#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dggan/core/errors.hpp"
#include "dggan/core/rng.hpp"
#include "dggan/dataio/dataset.hpp"
#include "dggan/dataio/fixtures.hpp"
#include "dggan/dataio/preprocess.hpp"
#include "dggan/eval/metrics.hpp"
#include "dggan/eval/reconstruct.hpp"
#include "dggan/eval/report.hpp"
#include "support/tmpdir.hpp"

using namespace dggan;
using namespace dggan::eval;
using dggan::testing::TempDir;

namespace {

// Independent oracle: sorted errors + exhaustive counting + Riemann sum over
// the breakpoint-aligned partition of [20, 50] (PCK is constant between
// breakpoints, so the aligned partition makes the Riemann sum exact).
double auc_oracle(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  std::vector<double> pts = {20.0, 50.0};
  for (double e : errors)
    if (e > 20.0 && e < 50.0) pts.push_back(e);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1], b = pts[i];
    const double mid = 0.5 * (a + b);
    std::size_t count = 0;
    for (double e : errors)
      if (e <= mid) ++count;
    area += (errors.empty() ? 0.0 : static_cast<double>(count) / errors.size()) * (b - a);
  }
  return area / 30.0;
}

std::vector<double> pck_oracle(std::vector<double> errors, const std::vector<double>& thresholds) {
  std::sort(errors.begin(), errors.end());
  std::vector<double> out;
  for (double t : thresholds) {
    const auto it = std::upper_bound(errors.begin(), errors.end(), t);
    out.push_back(errors.empty()
                      ? 0.0
                      : static_cast<double>(std::distance(errors.begin(), it)) / errors.size());
  }
  return out;
}

}  // namespace

TEST_CASE("decode_2d: scaling, tie-break, boundary") {
  Tensor maps({1, 8, 8});
  maps.at(0, 4, 3) = 1.0;  // x-cell 3, y-cell 4
  const Tensor kp = decode_2d(maps, 64, 64);
  CHECK(kp.at(0, 0) == doctest::Approx(28.0));
  CHECK(kp.at(0, 1) == doctest::Approx(36.0));

  // uniform map: row-major first occurrence -> cell (0,0) center
  Tensor flat = Tensor::full({1, 8, 8}, 0.25);
  const Tensor kp2 = decode_2d(flat, 64, 64);
  CHECK(kp2.at(0, 0) == doctest::Approx(4.0));
  CHECK(kp2.at(0, 1) == doctest::Approx(4.0));

  // peak at the last cell stays inside image bounds
  Tensor last({1, 8, 8});
  last.at(0, 7, 7) = 2.0;
  const Tensor kp3 = decode_2d(last, 64, 64);
  CHECK(kp3.at(0, 0) < 64.0);
  CHECK(kp3.at(0, 1) < 64.0);
  CHECK(kp3.at(0, 0) == doctest::Approx(60.0));
}

TEST_CASE("reconstruct_3d: optical axis, pinhole arithmetic, flagging") {
  dataio::CameraIntrinsics cam{100.0, 100.0, 32.0, 32.0};
  Tensor kp2d({2, 2});
  Tensor z({2});

  kp2d.at(0, 0) = 32.0;  // on the optical axis
  kp2d.at(0, 1) = 32.0;
  kp2d.at(1, 0) = 82.0;  // u - cx = 50
  kp2d.at(1, 1) = 32.0;
  z[0] = 0.0;
  z[1] = 0.0;
  const Reconstruction r = reconstruct_3d(kp2d, z, cam, 400.0, 60.0);
  CHECK(r.valid);
  CHECK(r.keypoints3d.at(0, 0) == doctest::Approx(0.0));
  CHECK(r.keypoints3d.at(0, 1) == doctest::Approx(0.0));
  CHECK(r.keypoints3d.at(0, 2) == doctest::Approx(400.0));
  CHECK(r.keypoints3d.at(1, 0) == doctest::Approx(200.0));  // 50 * 400 / 100

  Tensor zneg({2});
  zneg[0] = 0.0;
  zneg[1] = -10.0;  // z = 400 - 600 < 0
  const Reconstruction bad = reconstruct_3d(kp2d, zneg, cam, 400.0, 60.0);
  CHECK_FALSE(bad.valid);

  CHECK_THROWS_AS(reconstruct_3d(kp2d, z, cam, 400.0, 0.0), Error);
}

TEST_CASE("reconstruct_3d recovers fixture ground truth") {
  TempDir dir("recon");
  dataio::gen_fixtures(4, 64, 21, dir.path());
  const auto samples = dataio::load_dataset(dir.path(), dataio::DatasetLayout::fixture,
                                            dataio::Split::train);
  for (const auto& s : samples) {
    const auto z = dataio::relative_depths(s.keypoints3d, 0, 0, 9);
    double bone = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = s.keypoints3d.at(0, c) - s.keypoints3d.at(9, c);
      bone += d * d;
    }
    bone = std::sqrt(bone);
    const Reconstruction r = reconstruct_3d(s.keypoints2d, z.values, s.intrinsics,
                                            s.keypoints3d.at(0, 2), bone);
    REQUIRE(r.valid);
    for (int j = 0; j < s.k(); ++j) {
      double err = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = r.keypoints3d.at(j, c) - s.keypoints3d.at(j, c);
        err += d * d;
      }
      CHECK(std::sqrt(err) < 0.5);
    }
  }
}

TEST_CASE("epe: exact cases and invariances") {
  Tensor a({2, 3}), b({2, 3});
  const EpeResult zero = epe(a, b);
  CHECK(zero.mean == doctest::Approx(0.0));

  // rigid shift of (3,0,0)
  Tensor shifted = b;
  for (int j = 0; j < 2; ++j) shifted.at(j, 0) += 3.0;
  const EpeResult sh = epe(shifted, b);
  CHECK(sh.mean == doctest::Approx(3.0));
  CHECK(sh.median == doctest::Approx(3.0));

  // distances (1, 3) -> mean 2, median 2
  Tensor p({2, 3}), g({2, 3});
  p.at(0, 0) = 1.0;
  p.at(1, 1) = 3.0;
  const EpeResult d = epe(p, g);
  CHECK(d.mean == doctest::Approx(2.0));
  CHECK(d.median == doctest::Approx(2.0));

  // joint permutation applied to both + global translation applied to both
  Rng rng(3);
  Tensor pr({5, 3}), gr({5, 3});
  for (std::int64_t i = 0; i < pr.numel(); ++i) {
    pr[i] = rng.uniform(-10, 10);
    gr[i] = rng.uniform(-10, 10);
  }
  const EpeResult base = epe(pr, gr);
  const int perm[5] = {3, 0, 4, 1, 2};
  Tensor pp({5, 3}), gp({5, 3});
  for (int j = 0; j < 5; ++j)
    for (int c = 0; c < 3; ++c) {
      pp.at(perm[j], c) = pr.at(j, c) + 7.0;
      gp.at(perm[j], c) = gr.at(j, c) + 7.0;
    }
  const EpeResult permuted = epe(pp, gp);
  CHECK(permuted.mean == doctest::Approx(base.mean).epsilon(1e-12));
  CHECK(permuted.median == doctest::Approx(base.median).epsilon(1e-12));
}

TEST_CASE("pck_curve: counting and edge cases") {
  const PckCurve zero_curve = pck_curve({0.0, 0.0, 0.0}, {20, 30, 40});
  for (const auto& [t, f] : zero_curve) CHECK(f == doctest::Approx(1.0));

  const PckCurve c = pck_curve({10.0, 30.0}, {20.0, 40.0});
  CHECK(c[0].second == doctest::Approx(0.5));
  CHECK(c[1].second == doctest::Approx(1.0));

  CHECK(pck_curve({1.0}, {}).empty());

  // monotone non-decreasing
  Rng rng(5);
  std::vector<double> errors;
  for (int i = 0; i < 50; ++i) errors.push_back(rng.uniform(0, 60));
  const PckCurve mc = pck_curve(errors, default_pck_thresholds());
  for (std::size_t i = 1; i < mc.size(); ++i) CHECK(mc[i].second >= mc[i - 1].second);
}

TEST_CASE("auc_20_50: analytic cases") {
  // PCK identically 1 on [20, 50]
  CHECK(auc_20_50({{20.0, 1.0}, {50.0, 1.0}}) == doctest::Approx(1.0));

  // every error exactly 35 mm: step curve integrates to 15/30
  const std::vector<double> errors(21, 35.0);
  CHECK(auc_20_50(pck_curve_exact(errors)) == doctest::Approx(0.5).epsilon(1e-12));

  // linear ramp from 0 at 20 to 1 at 50
  CHECK(auc_20_50({{20.0, 0.0}, {50.0, 1.0}}) == doctest::Approx(0.5));

  // perfect predictions through the exact curve
  CHECK(auc_20_50(pck_curve_exact(std::vector<double>(10, 0.0))) == doctest::Approx(1.0));

  // insufficient coverage
  CHECK_THROWS_AS(auc_20_50({{25.0, 0.5}, {50.0, 1.0}}), Error);
  CHECK_THROWS_AS(auc_20_50({{20.0, 0.5}, {45.0, 1.0}}), Error);
  CHECK_THROWS_AS(auc_20_50({{20.0, 0.5}}), Error);
}

TEST_CASE("auc_20_50: refinement invariance for on-grid step curves") {
  // breakpoints on the integer grid
  const std::vector<double> errors = {25.0, 25.0, 35.0, 42.0};
  const double base = auc_20_50(pck_curve_exact(errors));
  // refine: add half-mm samples everywhere (via a finer exact grid)
  PckCurve fine = pck_curve_exact(errors);
  PckCurve refined;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    refined.push_back(fine[i]);
    if (i + 1 < fine.size() && fine[i + 1].first > fine[i].first) {
      const double tm = 0.5 * (fine[i].first + fine[i + 1].first);
      // pck is constant between breakpoints; insert the midpoint sample
      refined.emplace_back(tm, fine[i].second);
    }
  }
  CHECK(auc_20_50(refined) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("oracle equivalence on 1000 random error multisets") {
  Rng rng(123);
  double max_auc_diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(100));
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double e = rng.uniform(0.0, 70.0);
      if (rng.uniform() < 0.2) e = std::floor(e);  // exact-integer ties hit the jump logic
      errors.push_back(e);
    }

    // EPE: mean/median against a direct recomputation
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= n;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    const double median = (n % 2 == 1)
                              ? sorted[static_cast<std::size_t>(n / 2)]
                              : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                                       sorted[static_cast<std::size_t>(n / 2)]);
    const MetricsReport rep = build_report(errors, n, 0);
    CHECK(rep.epe_mean_mm == doctest::Approx(mean).epsilon(1e-12));
    CHECK(rep.epe_median_mm == doctest::Approx(median).epsilon(1e-12));

    // PCK against sorting + binary search
    const auto thresholds = default_pck_thresholds();
    const PckCurve curve = pck_curve(errors, thresholds);
    const std::vector<double> oracle = pck_oracle(errors, thresholds);
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      CHECK(curve[i].second == oracle[i]);

    // AUC against the breakpoint-aligned Riemann oracle
    const double impl = auc_20_50(pck_curve_exact(errors));
    const double want = auc_oracle(errors);
    max_auc_diff = std::max(max_auc_diff, std::fabs(impl - want));
  }
  CHECK(max_auc_diff <= 1e-6);
}

TEST_CASE("percent_reduction: paper-anchored arithmetic") {
  CHECK(format_percent(percent_reduction(10.91, 9.11)) == "16.5");
  CHECK(format_percent(percent_reduction(14.08, 13.12)) == "6.8");
  CHECK(percent_reduction(5.0, 5.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(percent_reduction(0.0, 1.0), Error);
}

TEST_CASE("report round trip") {
  const std::vector<double> errors = {5.0, 12.0, 25.5, 33.0, 47.0, 61.0};
  const MetricsReport r = build_report(errors, 2, 1);
  TempDir dir("report");
  emit_report(r, dir.path());
  const MetricsReport back = parse_report(dir.path());
  CHECK(back.auc_20_50 == r.auc_20_50);
  CHECK(back.epe_mean_mm == r.epe_mean_mm);
  CHECK(back.epe_median_mm == r.epe_median_mm);
  CHECK(back.sample_count == r.sample_count);
  CHECK(back.flagged_count == r.flagged_count);
  REQUIRE(back.pck.size() == r.pck.size());
  for (std::size_t i = 0; i < r.pck.size(); ++i) {
    CHECK(back.pck[i].first == r.pck[i].first);
    CHECK(back.pck[i].second == r.pck[i].second);
  }
  // curve file: one row per default threshold, monotone fractions
  CHECK(back.pck.size() == 31);
  for (std::size_t i = 1; i < back.pck.size(); ++i)
    CHECK(back.pck[i].second >= back.pck[i - 1].second);
}
