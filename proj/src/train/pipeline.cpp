#include "dggan/train/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dggan/core/errors.hpp"
#include "dggan/dataio/image_io.hpp"
#include "dggan/dataio/preprocess.hpp"
#include "dggan/eval/metrics.hpp"
#include "dggan/eval/reconstruct.hpp"

namespace dggan::train {

namespace {

Tensor hwc_to_chw_batch1(const Tensor& hwc) {
  const int h = hwc.dim(0), w = hwc.dim(1);
  Tensor chw({1, 3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) chw.at(0, c, y, x) = hwc.at(y, x, c);
  return chw;
}

struct SamplePrediction {
  Tensor kp2d;  // [K,2]
  Tensor z;     // [K]
};

SamplePrediction predict(TrainState& state, const dataio::HandSample& sample) {
  const auto& cfg = state.config;
  Tensor rgb = sample.rgb;
  if (sample.height() != cfg.image_size || sample.width() != cfg.image_size)
    rgb = dataio::resize_bilinear(rgb, cfg.image_size, cfg.image_size);
  const Tensor input = hwc_to_chw_batch1(rgb);
  state.cpm->forward(input);
  const Tensor final_maps = state.cpm->final_heatmaps();  // [1,K,h,w]
  const Tensor maps = final_maps.reshaped({cfg.k, cfg.heatmap_size, cfg.heatmap_size});
  SamplePrediction p;
  p.kp2d = eval::decode_2d(maps, cfg.image_size, cfg.image_size);
  p.z = state.regression->forward(final_maps).reshaped({cfg.k});
  return p;
}

double gt_bone_length(const dataio::HandSample& sample, const ExperimentConfig& cfg) {
  double l2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d =
        sample.keypoints3d.at(cfg.ref_bone_a, c) - sample.keypoints3d.at(cfg.ref_bone_b, c);
    l2 += d * d;
  }
  return std::sqrt(l2);
}

}  // namespace

std::vector<double> collect_joint_errors(TrainState& state,
                                         const std::vector<dataio::HandSample>& samples,
                                         std::int64_t* flagged) {
  std::vector<double> errors;
  if (flagged) *flagged = 0;
  for (const auto& sample : samples) {
    const SamplePrediction p = predict(state, sample);
    const double root_depth = sample.keypoints3d.at(state.config.root_joint, 2);
    const double bone = gt_bone_length(sample, state.config);
    const eval::Reconstruction rec =
        eval::reconstruct_3d(p.kp2d, p.z, sample.intrinsics, root_depth, bone);
    if (!rec.valid) {
      if (flagged) ++(*flagged);
      continue;
    }
    const eval::EpeResult e = eval::epe(rec.keypoints3d, sample.keypoints3d);
    errors.insert(errors.end(), e.per_joint.begin(), e.per_joint.end());
  }
  return errors;
}

eval::MetricsReport run_eval(TrainState& state, const std::vector<dataio::HandSample>& samples,
                             const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw IoError("run_eval: cannot create " + out_dir.string());

  std::vector<double> errors;
  std::int64_t flagged = 0;
  std::ofstream dump(out_dir / "predictions.csv");
  if (!dump) throw IoError("run_eval: cannot write predictions.csv");
  dump << "record_id";
  for (int j = 0; j < state.config.k; ++j) dump << ",u" << j << ",v" << j << ",z" << j;
  dump << "\n";

  for (const auto& sample : samples) {
    const SamplePrediction p = predict(state, sample);
    dump << sample.source_id;
    char buf[96];
    for (int j = 0; j < state.config.k; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.9g,%.9g,%.9g", p.kp2d.at(j, 0), p.kp2d.at(j, 1),
                    p.z[j]);
      dump << buf;
    }
    dump << "\n";

    const double root_depth = sample.keypoints3d.at(state.config.root_joint, 2);
    const double bone = gt_bone_length(sample, state.config);
    const eval::Reconstruction rec =
        eval::reconstruct_3d(p.kp2d, p.z, sample.intrinsics, root_depth, bone);
    if (!rec.valid) {
      ++flagged;
      continue;
    }
    const eval::EpeResult e = eval::epe(rec.keypoints3d, sample.keypoints3d);
    errors.insert(errors.end(), e.per_joint.begin(), e.per_joint.end());
  }

  const eval::MetricsReport report = eval::build_report(
      errors, static_cast<std::int64_t>(samples.size()) - flagged, flagged);
  eval::emit_report(report, out_dir);
  return report;
}

InferResult run_infer(TrainState& state, const Tensor& rgb_hwc) {
  const auto& cfg = state.config;
  Tensor rgb = rgb_hwc;
  if (rgb.dim(0) != cfg.image_size || rgb.dim(1) != cfg.image_size)
    rgb = dataio::resize_bilinear(rgb, cfg.image_size, cfg.image_size);
  const Tensor input = hwc_to_chw_batch1(rgb);

  InferResult r;
  state.cpm->forward(input);
  const Tensor final_maps = state.cpm->final_heatmaps();
  r.keypoints2d = eval::decode_2d(
      final_maps.reshaped({cfg.k, cfg.heatmap_size, cfg.heatmap_size}), cfg.image_size,
      cfg.image_size);
  r.relative_depths = state.regression->forward(final_maps).reshaped({cfg.k});
  r.depth_map =
      state.generator->forward(input).reshaped({cfg.image_size, cfg.image_size});
  return r;
}

void run_infer_files(TrainState& state, const std::filesystem::path& image_path,
                     const std::filesystem::path& out_dir) {
  const Tensor rgb = dataio::read_ppm8(image_path);
  const InferResult r = run_infer(state, rgb);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw IoError("infer: cannot create " + out_dir.string());

  std::ofstream kp(out_dir / "keypoints.csv");
  if (!kp) throw IoError("infer: cannot write keypoints.csv");
  kp << "joint,u,v,z_rel\n";
  char buf[96];
  for (int j = 0; j < state.config.k; ++j) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g", j, r.keypoints2d.at(j, 0),
                  r.keypoints2d.at(j, 1), r.relative_depths[j]);
    kp << buf << "\n";
  }
  dataio::write_pgm16(out_dir / "depth_pred.pgm", r.depth_map, 65535.0);
}

}  // namespace dggan::train
