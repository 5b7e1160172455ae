#include "dggan/train/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "dggan/core/errors.hpp"

namespace dggan::train {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& section) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) +
                        "'");
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const T& fallback,
            const std::string& section) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for config key '" +
                      (section.empty() ? key : section + "." + key) + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (k <= 1) throw ConfigError("k must be > 1");
  if (image_size < 16 || image_size % 16 != 0)
    throw ConfigError("image_size must be a positive multiple of 16");
  if (heatmap_size <= 0 || image_size % heatmap_size != 0)
    throw ConfigError("heatmap_size must divide image_size");
  if (sigma <= 0) throw ConfigError("sigma must be positive");
  if (root_joint < 0 || root_joint >= k) throw ConfigError("root_joint out of range");
  if (ref_bone_a == ref_bone_b || ref_bone_a < 0 || ref_bone_b < 0 || ref_bone_a >= k ||
      ref_bone_b >= k)
    throw ConfigError("ref_bone indices invalid");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (train.lr_pose <= 0 || train.lr_gan <= 0) throw ConfigError("learning rates must be > 0");
  if (train.steps_init_pose < 0 || train.steps_init_gan < 0 || train.steps_joint < 0)
    throw ConfigError("step counts must be >= 0");
  if (static_cast<int>(pose.dreg_channels.size()) != 5)
    throw ConfigError("pose.dreg_channels needs exactly 5 entries");
  weights.validate();
  pose::smooth_l1_variant_from_string(loss_z_variant);
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  check_keys(j,
             {"k", "image_size", "heatmap_size", "sigma", "seed", "root_joint", "ref_bone_a",
              "ref_bone_b", "loss_z_variant", "data", "pose", "gan", "loss_weights", "train"},
             "");
  c.k = get_field(j, "k", c.k, "");
  c.image_size = get_field(j, "image_size", c.image_size, "");
  c.heatmap_size = get_field(j, "heatmap_size", 0, "");
  if (c.heatmap_size == 0) c.heatmap_size = c.image_size / 8;
  c.sigma = get_field(j, "sigma", c.sigma, "");
  c.seed = get_field(j, "seed", c.seed, "");
  c.root_joint = get_field(j, "root_joint", c.root_joint, "");
  c.ref_bone_a = get_field(j, "ref_bone_a", c.ref_bone_a, "");
  c.ref_bone_b = get_field(j, "ref_bone_b", c.ref_bone_b, "");
  c.loss_z_variant = get_field(j, "loss_z_variant", c.loss_z_variant, "");

  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, {"task_root", "task_layout", "depth_pool_root", "depth_pool_layout"}, "data");
    c.data.task_root = get_field(d, "task_root", c.data.task_root, "data");
    c.data.task_layout = get_field(d, "task_layout", c.data.task_layout, "data");
    c.data.depth_pool_root = get_field(d, "depth_pool_root", c.data.depth_pool_root, "data");
    c.data.depth_pool_layout =
        get_field(d, "depth_pool_layout", c.data.depth_pool_layout, "data");
  }
  if (j.contains("pose")) {
    const auto& p = j.at("pose");
    check_keys(p,
               {"feature_channels", "stage_channels", "reg_conv_channels", "reg_fc1", "reg_fc2",
                "dreg_channels"},
               "pose");
    c.pose.feature_channels = get_field(p, "feature_channels", c.pose.feature_channels, "pose");
    c.pose.stage_channels = get_field(p, "stage_channels", c.pose.stage_channels, "pose");
    c.pose.reg_conv_channels =
        get_field(p, "reg_conv_channels", c.pose.reg_conv_channels, "pose");
    c.pose.reg_fc1 = get_field(p, "reg_fc1", c.pose.reg_fc1, "pose");
    c.pose.reg_fc2 = get_field(p, "reg_fc2", c.pose.reg_fc2, "pose");
    c.pose.dreg_channels = get_field(p, "dreg_channels", c.pose.dreg_channels, "pose");
  }
  if (j.contains("gan")) {
    const auto& g = j.at("gan");
    check_keys(g, {"base_channels", "residual_blocks", "generator_loss"}, "gan");
    c.gan.base_channels = get_field(g, "base_channels", c.gan.base_channels, "gan");
    c.gan.residual_blocks = get_field(g, "residual_blocks", c.gan.residual_blocks, "gan");
    c.gan.generator_loss = get_field(g, "generator_loss", c.gan.generator_loss, "gan");
  }
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    check_keys(w, {"lambda_z", "lambda_2d", "lambda_dep", "lambda_t", "lambda_g"}, "loss_weights");
    c.weights.lambda_z = get_field(w, "lambda_z", c.weights.lambda_z, "loss_weights");
    c.weights.lambda_2d = get_field(w, "lambda_2d", c.weights.lambda_2d, "loss_weights");
    c.weights.lambda_dep = get_field(w, "lambda_dep", c.weights.lambda_dep, "loss_weights");
    c.weights.lambda_t = get_field(w, "lambda_t", c.weights.lambda_t, "loss_weights");
    c.weights.lambda_g = get_field(w, "lambda_g", c.weights.lambda_g, "loss_weights");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t,
               {"batch_size", "lr_pose", "lr_gan", "steps_init_pose", "steps_init_gan",
                "steps_joint", "log_every", "regularizer_grad_to_generator", "skip_init_check",
                "freeze_generator", "log_path"},
               "train");
    c.train.batch_size = get_field(t, "batch_size", c.train.batch_size, "train");
    c.train.lr_pose = get_field(t, "lr_pose", c.train.lr_pose, "train");
    c.train.lr_gan = get_field(t, "lr_gan", c.train.lr_gan, "train");
    c.train.steps_init_pose = get_field(t, "steps_init_pose", c.train.steps_init_pose, "train");
    c.train.steps_init_gan = get_field(t, "steps_init_gan", c.train.steps_init_gan, "train");
    c.train.steps_joint = get_field(t, "steps_joint", c.train.steps_joint, "train");
    c.train.log_every = get_field(t, "log_every", c.train.log_every, "train");
    c.train.regularizer_grad_to_generator =
        get_field(t, "regularizer_grad_to_generator", c.train.regularizer_grad_to_generator,
                  "train");
    c.train.skip_init_check = get_field(t, "skip_init_check", c.train.skip_init_check, "train");
    c.train.freeze_generator = get_field(t, "freeze_generator", c.train.freeze_generator, "train");
    c.train.log_path = get_field(t, "log_path", c.train.log_path, "train");
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{
      {"k", c.k},
      {"image_size", c.image_size},
      {"heatmap_size", c.heatmap_size},
      {"sigma", c.sigma},
      {"seed", c.seed},
      {"root_joint", c.root_joint},
      {"ref_bone_a", c.ref_bone_a},
      {"ref_bone_b", c.ref_bone_b},
      {"loss_z_variant", c.loss_z_variant},
      {"data",
       {{"task_root", c.data.task_root},
        {"task_layout", c.data.task_layout},
        {"depth_pool_root", c.data.depth_pool_root},
        {"depth_pool_layout", c.data.depth_pool_layout}}},
      {"pose",
       {{"feature_channels", c.pose.feature_channels},
        {"stage_channels", c.pose.stage_channels},
        {"reg_conv_channels", c.pose.reg_conv_channels},
        {"reg_fc1", c.pose.reg_fc1},
        {"reg_fc2", c.pose.reg_fc2},
        {"dreg_channels", c.pose.dreg_channels}}},
      {"gan",
       {{"base_channels", c.gan.base_channels},
        {"residual_blocks", c.gan.residual_blocks},
        {"generator_loss", c.gan.generator_loss}}},
      {"loss_weights",
       {{"lambda_z", c.weights.lambda_z},
        {"lambda_2d", c.weights.lambda_2d},
        {"lambda_dep", c.weights.lambda_dep},
        {"lambda_t", c.weights.lambda_t},
        {"lambda_g", c.weights.lambda_g}}},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"lr_pose", c.train.lr_pose},
        {"lr_gan", c.train.lr_gan},
        {"steps_init_pose", c.train.steps_init_pose},
        {"steps_init_gan", c.train.steps_init_gan},
        {"steps_joint", c.train.steps_joint},
        {"log_every", c.train.log_every},
        {"regularizer_grad_to_generator", c.train.regularizer_grad_to_generator},
        {"skip_init_check", c.train.skip_init_check},
        {"freeze_generator", c.train.freeze_generator},
        {"log_path", c.train.log_path}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void check_structural_match(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto mismatch = [](const std::string& key, auto va, auto vb) {
    throw ConfigError("checkpoint config mismatch on '" + key + "': " + std::to_string(va) +
                      " vs " + std::to_string(vb));
  };
  if (a.k != b.k) mismatch("k", a.k, b.k);
  if (a.image_size != b.image_size) mismatch("image_size", a.image_size, b.image_size);
  if (a.heatmap_size != b.heatmap_size) mismatch("heatmap_size", a.heatmap_size, b.heatmap_size);
  if (a.pose.feature_channels != b.pose.feature_channels)
    mismatch("pose.feature_channels", a.pose.feature_channels, b.pose.feature_channels);
  if (a.pose.stage_channels != b.pose.stage_channels)
    mismatch("pose.stage_channels", a.pose.stage_channels, b.pose.stage_channels);
  if (a.pose.reg_conv_channels != b.pose.reg_conv_channels)
    mismatch("pose.reg_conv_channels", a.pose.reg_conv_channels, b.pose.reg_conv_channels);
  if (a.pose.reg_fc1 != b.pose.reg_fc1) mismatch("pose.reg_fc1", a.pose.reg_fc1, b.pose.reg_fc1);
  if (a.pose.reg_fc2 != b.pose.reg_fc2) mismatch("pose.reg_fc2", a.pose.reg_fc2, b.pose.reg_fc2);
  if (a.pose.dreg_channels != b.pose.dreg_channels)
    throw ConfigError("checkpoint config mismatch on 'pose.dreg_channels'");
  if (a.gan.base_channels != b.gan.base_channels)
    mismatch("gan.base_channels", a.gan.base_channels, b.gan.base_channels);
  if (a.gan.residual_blocks != b.gan.residual_blocks)
    mismatch("gan.residual_blocks", a.gan.residual_blocks, b.gan.residual_blocks);
}

}  // namespace dggan::train
