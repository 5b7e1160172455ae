#pragma once

#include <map>
#include <memory>
#include <optional>

#include "dggan/core/rng.hpp"
#include "dggan/dataio/dataset.hpp"
#include "dggan/gan/losses.hpp"
#include "dggan/gan/nets.hpp"
#include "dggan/nn/adam.hpp"
#include "dggan/pose/nets.hpp"
#include "dggan/train/config.hpp"

namespace dggan::train {

enum class Phase { init_pose, init_gan, joint };

const char* to_string(Phase p);
Phase phase_from_string(const std::string& s);

// One preprocessed training record: CHW image plus loss targets.
struct TrainItem {
  std::string id;
  Tensor rgb;           // [3,H,W]
  Tensor heat_targets;  // [K,h,w]
  Tensor z_star;        // [K]
  Tensor d_star;        // [1,n,n] normalized ground-truth depth; empty if absent
  bool has_depth = false;
};

struct TrainingSet {
  std::vector<TrainItem> items;
};

TrainingSet prepare_training_set(const std::vector<dataio::HandSample>& samples,
                                 const ExperimentConfig& config);

struct StepLosses {
  double l_2d = 0, l_z = 0, l_dep = 0, l_task = 0, l_gan_d = 0, l_gan_g = 0, total = 0;
};

// All networks, optimizers and the training RNG. Checkpoints restore this
// bitwise (same platform / build).
struct TrainState {
  ExperimentConfig config;
  Phase phase = Phase::init_pose;
  std::int64_t global_step = 0;
  bool pose_initialized = false;
  bool gan_initialized = false;
  Rng rng;
  StepLosses last_losses;

  std::unique_ptr<pose::CpmNet> cpm;
  std::unique_ptr<pose::RegressionNet> regression;
  std::unique_ptr<pose::DepthRegularizerNet> depth_reg;
  std::unique_ptr<gan::GeneratorNet> generator;
  std::unique_ptr<gan::DiscriminatorNet> discriminator;
  std::unique_ptr<nn::Adam> opt_pose;
  std::unique_ptr<nn::Adam> opt_gen;
  std::unique_ptr<nn::Adam> opt_disc;

  std::vector<nn::Param*> pose_params();
  std::vector<nn::Param*> generator_params();
  std::vector<nn::Param*> discriminator_params();
};

// Fresh state with seed-deterministic weight init.
TrainState init_state(const ExperimentConfig& config);

// Append-only CSV logger: step, phase, loss components.
class TrainLog {
 public:
  explicit TrainLog(const std::string& path = "");  // empty -> disabled
  void log(std::int64_t step, Phase phase, const StepLosses& losses);

 private:
  std::string path_;
};

// Phase 1a: pose module on ground-truth depth regularizer targets. Every
// sample must carry depth.
void init_phase_pose(TrainState& state, const TrainingSet& data, int steps, TrainLog& log);

// Phase 1b: alternating discriminator/generator updates on unpaired sets.
void init_phase_gan(TrainState& state, const TrainingSet& rgb_set, const dataio::DepthPool& pool,
                    int steps, TrainLog& log);

// Phase 2: end-to-end min-max fine-tuning. The regularizer target is the
// live generator output; ground-truth depth is never read.
void joint_finetune(TrainState& state, const TrainingSet& task_set, const dataio::DepthPool& pool,
                    int steps, TrainLog& log);

// Snapshots taken between the two sub-steps of a joint iteration, for tests
// asserting that the discriminator ascent never touches generator or pose
// parameters and the joint descent never touches discriminator parameters.
struct JointStepTrace {
  std::vector<Tensor> disc_after_ascent;
  std::vector<Tensor> pose_after_ascent;
  std::vector<Tensor> gen_after_ascent;
};

// Runs one joint iteration (discriminator ascent + joint descent); exposed
// for tests that inspect per-step behavior.
StepLosses joint_step(TrainState& state, const TrainingSet& task_set,
                      const std::vector<Tensor>& pool_normalized,
                      JointStepTrace* trace = nullptr);

// Normalizes and resizes every pool item once, for batch assembly.
std::vector<Tensor> prepare_pool(const dataio::DepthPool& pool, int size);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path,
                           const ExperimentConfig* expect = nullptr);

}  // namespace dggan::train
