#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "dggan/pose/losses.hpp"

namespace dggan::train {

struct DataConfig {
  std::string task_root;
  std::string task_layout = "fixture";
  std::string depth_pool_root;
  std::string depth_pool_layout = "fixture";
};

struct PoseModelConfig {
  int feature_channels = 32;
  int stage_channels = 32;
  int reg_conv_channels = 32;
  int reg_fc1 = 512;
  int reg_fc2 = 256;
  std::vector<int> dreg_channels = {128, 64, 32, 16, 8};
};

struct GanModelConfig {
  int base_channels = 16;
  int residual_blocks = 2;
  std::string generator_loss = "non_saturating";
};

struct TrainSchedule {
  int batch_size = 4;
  double lr_pose = 1e-4;
  double lr_gan = 2e-4;
  int steps_init_pose = 2000;
  int steps_init_gan = 2000;
  int steps_joint = 1000;
  int log_every = 50;
  bool regularizer_grad_to_generator = true;
  bool skip_init_check = false;
  bool freeze_generator = false;
  std::string log_path;  // optional CSV training log
};

// Everything an experiment needs, loaded from one JSON file. Flags on the CLI
// only select paths, phase and seed.
struct ExperimentConfig {
  int k = 21;
  int image_size = 64;
  int heatmap_size = 8;  // 0 -> image_size / 8
  double sigma = 1.5;    // heatmap px
  std::uint64_t seed = 1;
  int root_joint = 0;
  int ref_bone_a = 0;
  int ref_bone_b = 9;  // wrist -> middle MCP
  std::string loss_z_variant = "paper";
  DataConfig data;
  PoseModelConfig pose;
  GanModelConfig gan;
  pose::LossWeights weights;
  TrainSchedule train;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

// True when the checkpointed config can restore into nets built for `other`
// (same structural hyperparameters).
void check_structural_match(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace dggan::train
