#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "dggan/core/errors.hpp"
#include "dggan/dataio/dataset.hpp"
#include "dggan/dataio/fixtures.hpp"
#include "dggan/train/pipeline.hpp"
#include "dggan/train/trainer.hpp"

namespace {

using namespace dggan;

std::string resolve_config_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DGGAN_CONFIG")) return env;
  throw ConfigError("no config file: pass --config or set DGGAN_CONFIG");
}

train::TrainState state_from_checkpoint_or_fresh(const train::ExperimentConfig& config,
                                                 const std::string& checkpoint_in) {
  if (checkpoint_in.empty()) return train::init_state(config);
  train::TrainState state = train::load_checkpoint(checkpoint_in, &config);
  // Runtime knobs (paths, schedules, weights) follow the config file; only
  // structural hyperparameters must match the checkpoint.
  state.config.data = config.data;
  state.config.train = config.train;
  state.config.weights = config.weights;
  state.config.loss_z_variant = config.loss_z_variant;
  return state;
}

int cmd_gen_fixtures(int count, int size, std::uint64_t seed, const std::string& out,
                     int eval_count) {
  dataio::gen_fixtures(count, size, seed, out, eval_count);
  std::cout << "wrote " << count << " fixture records to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& phase,
              const std::string& checkpoint_in, const std::string& checkpoint_out,
              std::int64_t seed_override) {
  train::ExperimentConfig config = train::load_config(resolve_config_path(config_path));
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);

  const bool run_pose = phase == "init-pose" || phase == "all";
  const bool run_gan = phase == "init-gan" || phase == "all";
  const bool run_joint = phase == "joint" || phase == "all";
  if (!run_pose && !run_gan && !run_joint)
    throw ConfigError("unknown --phase '" + phase + "' (init-pose|init-gan|joint|all)");

  if (phase == "joint" && checkpoint_in.empty() && !config.train.skip_init_check)
    throw Error(
        "train --phase joint: missing init checkpoint (--checkpoint-in); run the init phases "
        "first or set train.skip_init_check");

  train::TrainState state = state_from_checkpoint_or_fresh(config, checkpoint_in);
  train::TrainLog log(config.train.log_path);

  const auto task_layout = dataio::layout_from_string(config.data.task_layout);
  if (run_pose) {
    const auto samples =
        dataio::load_dataset(config.data.task_root, task_layout, dataio::Split::train);
    const auto data = train::prepare_training_set(samples, config);
    train::init_phase_pose(state, data, config.train.steps_init_pose, log);
    std::cout << "init_pose done at step " << state.global_step
              << " (task loss " << state.last_losses.l_task << ")\n";
  }
  if (run_gan || run_joint) {
    const auto pool =
        dataio::load_depth_pool(config.data.depth_pool_root,
                                dataio::layout_from_string(config.data.depth_pool_layout),
                                dataio::Split::train);
    if (run_gan) {
      const auto samples = dataio::load_dataset(config.data.task_root, task_layout,
                                                dataio::Split::train, {/*with_depth=*/false});
      const auto data = train::prepare_training_set(samples, config);
      train::init_phase_gan(state, data, pool, config.train.steps_init_gan, log);
      std::cout << "init_gan done at step " << state.global_step
                << " (D loss " << state.last_losses.l_gan_d << ")\n";
    }
    if (run_joint) {
      const auto samples = dataio::load_dataset(config.data.task_root, task_layout,
                                                dataio::Split::train, {/*with_depth=*/false});
      const auto data = train::prepare_training_set(samples, config);
      train::joint_finetune(state, data, pool, config.train.steps_joint, log);
      std::cout << "joint done at step " << state.global_step
                << " (total " << state.last_losses.total << ")\n";
    }
  }
  if (!checkpoint_out.empty()) {
    train::save_checkpoint(state, checkpoint_out);
    std::cout << "checkpoint written to " << checkpoint_out << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& split, const std::string& out_dir) {
  const train::ExperimentConfig config = train::load_config(resolve_config_path(config_path));
  train::TrainState state = train::load_checkpoint(checkpoint, &config);
  const auto samples =
      dataio::load_dataset(config.data.task_root, dataio::layout_from_string(config.data.task_layout),
                           dataio::split_from_string(split));
  const eval::MetricsReport report = train::run_eval(state, samples, out_dir);
  std::cout << "auc_20_50=" << report.auc_20_50 << " epe_mean_mm=" << report.epe_mean_mm
            << " epe_median_mm=" << report.epe_median_mm << " n=" << report.sample_count
            << " flagged=" << report.flagged_count << "\n";
  return 0;
}

int cmd_infer(const std::string& config_path, const std::string& checkpoint,
              const std::string& image, const std::string& out_dir) {
  const train::ExperimentConfig config = train::load_config(resolve_config_path(config_path));
  train::TrainState state = train::load_checkpoint(checkpoint, &config);
  train::run_infer_files(state, image, out_dir);
  std::cout << "wrote keypoints.csv and depth_pred.pgm to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D hand pose estimation with GAN-synthesized depth regularization"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-fixtures", "generate a synthetic fixture dataset");
  int count = 8, size = 64, eval_count = 0;
  std::uint64_t seed = 7;
  std::string out;
  gen->add_option("--count", count, "number of records")->required();
  gen->add_option("--size", size, "image size in px");
  gen->add_option("--seed", seed, "generation seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--eval-count", eval_count, "records reserved for the eval split");

  auto* tr = app.add_subcommand("train", "run training phases");
  std::string config_path, phase = "all", ckpt_in, ckpt_out;
  std::int64_t seed_override = -1;
  tr->add_option("--config", config_path, "experiment config (or DGGAN_CONFIG)");
  tr->add_option("--phase", phase, "init-pose|init-gan|joint|all");
  tr->add_option("--checkpoint-in", ckpt_in, "resume from checkpoint");
  tr->add_option("--checkpoint-out", ckpt_out, "write checkpoint here");
  tr->add_option("--seed", seed_override, "override config seed");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  std::string ev_config, ev_ckpt, ev_split = "eval", ev_out = "eval_out";
  ev->add_option("--config", ev_config, "experiment config (or DGGAN_CONFIG)");
  ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
  ev->add_option("--split", ev_split, "train|eval");
  ev->add_option("--out", ev_out, "report output directory");

  auto* inf = app.add_subcommand("infer", "single-image inference");
  std::string in_config, in_ckpt, in_image, in_out = "infer_out";
  inf->add_option("--config", in_config, "experiment config (or DGGAN_CONFIG)");
  inf->add_option("--checkpoint", in_ckpt, "trained checkpoint")->required();
  inf->add_option("--image", in_image, "input RGB image (binary PPM)")->required();
  inf->add_option("--out", in_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage problems (unknown subcommand, bad flags) exit 2 with usage text.
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_fixtures(count, size, seed, out, eval_count);
    if (tr->parsed()) return cmd_train(config_path, phase, ckpt_in, ckpt_out, seed_override);
    if (ev->parsed()) return cmd_eval(ev_config, ev_ckpt, ev_split, ev_out);
    if (inf->parsed()) return cmd_infer(in_config, in_ckpt, in_image, in_out);
  } catch (const dggan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
