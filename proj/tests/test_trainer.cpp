#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dggan/core/errors.hpp"
#include "dggan/dataio/fixtures.hpp"
#include "dggan/dataio/image_io.hpp"
#include "dggan/train/pipeline.hpp"
#include "dggan/train/trainer.hpp"
#include "support/tmpdir.hpp"

using namespace dggan;
using namespace dggan::train;
using dggan::testing::TempDir;

namespace {

ExperimentConfig tiny_config(const std::string& task_root, const std::string& pool_root) {
  ExperimentConfig c;
  c.k = 21;
  c.image_size = 64;
  c.heatmap_size = 16;
  c.sigma = 1.5;
  c.seed = 5;
  c.data.task_root = task_root;
  c.data.depth_pool_root = pool_root;
  c.pose.feature_channels = 4;
  c.pose.stage_channels = 4;
  c.pose.reg_conv_channels = 4;
  c.pose.reg_fc1 = 16;
  c.pose.reg_fc2 = 8;
  c.pose.dreg_channels = {8, 8, 8, 8, 8};
  c.gan.base_channels = 4;
  c.train.batch_size = 2;
  c.train.steps_init_pose = 4;
  c.train.steps_init_gan = 4;
  c.train.steps_joint = 4;
  c.train.log_every = 0;
  return c;
}

struct FixtureEnv {
  TempDir task{"task"};
  TempDir pool{"pool"};
  ExperimentConfig config;

  FixtureEnv() {
    dataio::gen_fixtures(6, 64, 101, task.path());
    dataio::gen_fixtures(6, 64, 202, pool.path());
    config = tiny_config(task.path().string(), pool.path().string());
  }

  TrainingSet task_set(bool with_depth = true) const {
    const auto samples = dataio::load_dataset(task.path(), dataio::DatasetLayout::fixture,
                                              dataio::Split::train, {with_depth});
    return prepare_training_set(samples, config);
  }

  dataio::DepthPool depth_pool() const {
    return dataio::load_depth_pool(pool.path(), dataio::DatasetLayout::fixture,
                                   dataio::Split::train);
  }
};

std::vector<Tensor> snapshot(std::vector<nn::Param*> params) {
  std::vector<Tensor> out;
  for (nn::Param* p : params) out.push_back(p->value);
  return out;
}

bool identical(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].numel() != b[i].numel()) return false;
    for (std::int64_t j = 0; j < a[i].numel(); ++j)
      if (a[i][j] != b[i][j]) return false;
  }
  return true;
}

double grad_norm(std::vector<nn::Param*> params) {
  double s = 0.0;
  for (nn::Param* p : params)
    for (std::int64_t i = 0; i < p->grad.numel(); ++i) s += p->grad[i] * p->grad[i];
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("init_state is seed-deterministic") {
  FixtureEnv env;
  TrainState a = init_state(env.config);
  TrainState b = init_state(env.config);
  CHECK(identical(snapshot(a.pose_params()), snapshot(b.pose_params())));
  CHECK(identical(snapshot(a.generator_params()), snapshot(b.generator_params())));
  CHECK(identical(snapshot(a.discriminator_params()), snapshot(b.discriminator_params())));
}

TEST_CASE("init_phase_pose: zero steps is identity, missing depth errors") {
  FixtureEnv env;
  TrainLog log;
  TrainState s = init_state(env.config);
  const auto before = snapshot(s.pose_params());
  const TrainingSet data = env.task_set();
  init_phase_pose(s, data, 0, log);
  CHECK(identical(before, snapshot(s.pose_params())));
  CHECK(s.global_step == 0);
  CHECK(s.pose_initialized);

  TrainingSet no_depth = env.task_set(false);
  TrainState s2 = init_state(env.config);
  CHECK_THROWS_WITH_AS(init_phase_pose(s2, no_depth, 1, log),
                       doctest::Contains("rec_0000"), Error);
}

TEST_CASE("training phases run and are deterministic") {
  FixtureEnv env;
  const TrainingSet data = env.task_set();
  const auto pool = env.depth_pool();

  TrainLog log;
  TrainState a = init_state(env.config);
  init_phase_pose(a, data, 4, log);
  init_phase_gan(a, data, pool, 4, log);
  joint_finetune(a, data, pool, 4, log);

  TrainState b = init_state(env.config);
  init_phase_pose(b, data, 4, log);
  init_phase_gan(b, data, pool, 4, log);
  joint_finetune(b, data, pool, 4, log);

  CHECK(a.last_losses.total == b.last_losses.total);
  CHECK(identical(snapshot(a.pose_params()), snapshot(b.pose_params())));
  CHECK(identical(snapshot(a.generator_params()), snapshot(b.generator_params())));
  CHECK(identical(snapshot(a.discriminator_params()), snapshot(b.discriminator_params())));
  CHECK(a.global_step == 12);
}

TEST_CASE("joint_finetune requires completed init phases") {
  FixtureEnv env;
  const TrainingSet data = env.task_set(false);
  const auto pool = env.depth_pool();
  TrainLog log;
  TrainState s = init_state(env.config);
  CHECK_THROWS_AS(joint_finetune(s, data, pool, 1, log), Error);

  // explicitly skipped via config
  ExperimentConfig skip = env.config;
  skip.train.skip_init_check = true;
  TrainState s2 = init_state(skip);
  joint_finetune(s2, data, pool, 1, log);
  CHECK(s2.global_step == 1);
}

TEST_CASE("min-max parameter isolation") {
  FixtureEnv env;
  const TrainingSet data = env.task_set(false);
  const auto pool = env.depth_pool();
  TrainLog log;

  // discriminator-only steps leave generator and pose untouched
  ExperimentConfig frozen = env.config;
  frozen.train.freeze_generator = true;
  TrainState s = init_state(frozen);
  const auto gen_before = snapshot(s.generator_params());
  const auto pose_before = snapshot(s.pose_params());
  const auto disc_before = snapshot(s.discriminator_params());
  init_phase_gan(s, data, pool, 3, log);
  CHECK(identical(gen_before, snapshot(s.generator_params())));
  CHECK(identical(pose_before, snapshot(s.pose_params())));
  CHECK_FALSE(identical(disc_before, snapshot(s.discriminator_params())));

  // within a joint iteration: the ascent leaves pose/generator untouched and
  // the descent leaves the discriminator untouched
  ExperimentConfig skip = env.config;
  skip.train.skip_init_check = true;
  TrainState j = init_state(skip);
  const auto jpose_before = snapshot(j.pose_params());
  const auto jgen_before = snapshot(j.generator_params());
  const auto pool_items = prepare_pool(pool, skip.image_size);
  JointStepTrace trace;
  joint_step(j, data, pool_items, &trace);
  CHECK(identical(trace.pose_after_ascent, jpose_before));
  CHECK(identical(trace.gen_after_ascent, jgen_before));
  CHECK(identical(trace.disc_after_ascent, snapshot(j.discriminator_params())));
  CHECK_FALSE(identical(jpose_before, snapshot(j.pose_params())));
}

TEST_CASE("lambda_g = 0: generator gradient flows only through the regularizer") {
  FixtureEnv env;
  const TrainingSet data = env.task_set(false);
  const auto pool_items = prepare_pool(env.depth_pool(), env.config.image_size);

  ExperimentConfig cfg = env.config;
  cfg.train.skip_init_check = true;
  cfg.weights.lambda_g = 0.0;

  // regularizer path off: zero generator gradient
  cfg.train.regularizer_grad_to_generator = false;
  {
    TrainState s = init_state(cfg);
    joint_step(s, data, pool_items);
    CHECK(grad_norm(s.generator_params()) == 0.0);
  }
  // regularizer path on: nonzero gradient (and it is the only path)
  cfg.train.regularizer_grad_to_generator = true;
  {
    TrainState s = init_state(cfg);
    joint_step(s, data, pool_items);
    CHECK(grad_norm(s.generator_params()) > 0.0);
  }
}

TEST_CASE("loss bookkeeping: total recomposes from components") {
  FixtureEnv env;
  const TrainingSet data = env.task_set(false);
  const auto pool_items = prepare_pool(env.depth_pool(), env.config.image_size);
  ExperimentConfig cfg = env.config;
  cfg.train.skip_init_check = true;
  cfg.weights.lambda_g = 0.05;
  TrainState s = init_state(cfg);
  const StepLosses l = joint_step(s, data, pool_items);
  const auto& w = cfg.weights;
  CHECK(std::fabs(l.l_task - (w.lambda_z * l.l_z + w.lambda_2d * l.l_2d + w.lambda_dep * l.l_dep)) <
        1e-6);
  CHECK(std::fabs(l.total - (w.lambda_t * l.l_task + w.lambda_g * l.l_gan_g)) < 1e-6);
}

TEST_CASE("checkpoint: bitwise round trip and errors") {
  FixtureEnv env;
  TempDir ckdir("ckpt");
  const TrainingSet data = env.task_set();
  TrainLog log;
  TrainState s = init_state(env.config);
  init_phase_pose(s, data, 3, log);

  Tensor probe({1, 3, 64, 64});
  for (std::int64_t i = 0; i < probe.numel(); ++i) probe[i] = ((i * 31) % 97) / 97.0;
  const Tensor out_before = s.cpm->forward(probe);
  const Tensor gen_before = s.generator->forward(probe);

  const auto path = ckdir / "state.ck";
  save_checkpoint(s, path);
  TrainState r = load_checkpoint(path);
  CHECK(r.global_step == s.global_step);
  CHECK(r.pose_initialized == s.pose_initialized);
  CHECK(r.rng.serialize() == s.rng.serialize());

  const Tensor out_after = r.cpm->forward(probe);
  for (std::int64_t i = 0; i < out_before.numel(); ++i) CHECK(out_before[i] == out_after[i]);
  const Tensor gen_after = r.generator->forward(probe);
  for (std::int64_t i = 0; i < gen_before.numel(); ++i) CHECK(gen_before[i] == gen_after[i]);

  // structural mismatch: different K is rejected with a config error
  ExperimentConfig other = env.config;
  other.k = 19;
  other.ref_bone_b = 9;
  CHECK_THROWS_WITH_AS(load_checkpoint(path, &other), doctest::Contains("'k'"), ConfigError);

  // corrupt archive
  {
    std::ofstream os(ckdir / "garbage.ck", std::ios::binary);
    os << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(load_checkpoint(ckdir / "garbage.ck"), CheckpointError);

  // truncated archive
  {
    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::ofstream os(ckdir / "trunc.ck", std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(ckdir / "trunc.ck"), CheckpointError);
}

TEST_CASE("resume equals uninterrupted run") {
  FixtureEnv env;
  TempDir ckdir("resume");
  const TrainingSet data = env.task_set();
  TrainLog log;

  TrainState full = init_state(env.config);
  init_phase_pose(full, data, 10, log);

  TrainState half = init_state(env.config);
  init_phase_pose(half, data, 6, log);
  save_checkpoint(half, ckdir / "mid.ck");
  TrainState resumed = load_checkpoint(ckdir / "mid.ck");
  init_phase_pose(resumed, data, 4, log);

  CHECK(resumed.global_step == full.global_step);
  CHECK(resumed.last_losses.l_task == full.last_losses.l_task);
  CHECK(identical(snapshot(resumed.pose_params()), snapshot(full.pose_params())));
}

TEST_CASE("joint phase never reads ground-truth depth, even with files deleted") {
  FixtureEnv env;
  TrainLog log;
  TrainState s = init_state(env.config);
  init_phase_pose(s, env.task_set(), 2, log);
  init_phase_gan(s, env.task_set(false), env.depth_pool(), 2, log);

  // remove every ground-truth depth file from the task root
  for (const auto& entry : std::filesystem::directory_iterator(env.task.path()))
    if (entry.path().string().find("_depth.pgm") != std::string::npos)
      std::filesystem::remove(entry.path());

  const TrainingSet joint_data = env.task_set(false);  // loads fine without depth
  const std::size_t reads_before = dataio::depth_reads_under(env.task.path());
  joint_finetune(s, joint_data, env.depth_pool(), 3, log);
  CHECK(dataio::depth_reads_under(env.task.path()) == reads_before);
  CHECK(s.global_step == 7);
}

TEST_CASE("eval pipeline emits parseable reports") {
  FixtureEnv env;
  TempDir out("evalout");
  TrainState s = init_state(env.config);
  const auto samples =
      dataio::load_dataset(env.task.path(), dataio::DatasetLayout::fixture, dataio::Split::train);
  const eval::MetricsReport rep = run_eval(s, samples, out.path());
  CHECK(rep.sample_count + rep.flagged_count == static_cast<std::int64_t>(samples.size()));
  const eval::MetricsReport parsed = eval::parse_report(out.path());
  CHECK(parsed.auc_20_50 == rep.auc_20_50);
  CHECK(parsed.epe_mean_mm == rep.epe_mean_mm);
  CHECK(std::filesystem::exists(out / "predictions.csv"));
}
