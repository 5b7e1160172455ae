#pragma once

#include "dggan/eval/report.hpp"
#include "dggan/train/trainer.hpp"

namespace dggan::train {

// Runs the pose pipeline over a sample list, lifts predictions to 3D with
// ground-truth root depth and reference bone length, writes summary/curve
// files plus a per-sample prediction dump, and returns the report.
eval::MetricsReport run_eval(TrainState& state, const std::vector<dataio::HandSample>& samples,
                             const std::filesystem::path& out_dir);

// Convenience: per-sample pooled joint errors without report emission.
std::vector<double> collect_joint_errors(TrainState& state,
                                         const std::vector<dataio::HandSample>& samples,
                                         std::int64_t* flagged = nullptr);

struct InferResult {
  Tensor keypoints2d;      // [K,2] image px
  Tensor relative_depths;  // [K]
  Tensor depth_map;        // [n,n] in [0,1]
};

InferResult run_infer(TrainState& state, const Tensor& rgb_hwc);

// CLI entry: reads the image, runs inference, writes keypoints.csv and
// depth_pred.pgm (16-bit, rescaled from [0,1]) into out_dir.
void run_infer_files(TrainState& state, const std::filesystem::path& image_path,
                     const std::filesystem::path& out_dir);

}  // namespace dggan::train
