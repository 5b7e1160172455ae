#include "dggan/train/trainer.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "dggan/core/errors.hpp"
#include "dggan/dataio/preprocess.hpp"
#include "dggan/nn/ops.hpp"

namespace dggan::train {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::init_pose: return "init_pose";
    case Phase::init_gan: return "init_gan";
    case Phase::joint: return "joint";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "init_pose") return Phase::init_pose;
  if (s == "init_gan") return Phase::init_gan;
  if (s == "joint") return Phase::joint;
  throw ConfigError("unknown phase '" + s + "'");
}

// ---------------------------------------------------------------------------
// Data preparation

namespace {

Tensor hwc_to_chw(const Tensor& hwc) {
  const int h = hwc.dim(0), w = hwc.dim(1), c = hwc.dim(2);
  Tensor chw({c, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) chw.at(ch, y, x) = hwc.at(y, x, ch);
  return chw;
}

}  // namespace

TrainingSet prepare_training_set(const std::vector<dataio::HandSample>& samples,
                                 const ExperimentConfig& config) {
  TrainingSet set;
  set.items.reserve(samples.size());
  for (const auto& sample : samples) {
    if (sample.height() != config.image_size || sample.width() != config.image_size)
      throw Error("sample '" + sample.source_id + "' is " + std::to_string(sample.width()) + "x" +
                  std::to_string(sample.height()) + ", config expects " +
                  std::to_string(config.image_size));
    TrainItem item;
    item.id = sample.source_id;
    item.rgb = hwc_to_chw(sample.rgb);

    Tensor kp_hm({sample.k(), 2});
    for (int j = 0; j < sample.k(); ++j) {
      kp_hm.at(j, 0) = dataio::image_to_heatmap(sample.keypoints2d.at(j, 0), config.image_size,
                                                config.heatmap_size);
      kp_hm.at(j, 1) = dataio::image_to_heatmap(sample.keypoints2d.at(j, 1), config.image_size,
                                                config.heatmap_size);
    }
    item.heat_targets =
        dataio::make_heatmap_targets(kp_hm, config.heatmap_size, config.heatmap_size, config.sigma)
            .maps;
    item.z_star = dataio::relative_depths(sample.keypoints3d, config.root_joint, config.ref_bone_a,
                                          config.ref_bone_b)
                      .values;
    if (sample.depth.has_value()) {
      dataio::DepthMap raw = *sample.depth;
      if (raw.height() != config.image_size || raw.width() != config.image_size)
        raw.values = dataio::resize_bilinear(raw.values, config.image_size, config.image_size);
      const dataio::DepthMap normalized = dataio::normalize_depth(raw);
      item.d_star = normalized.values.reshaped({1, config.image_size, config.image_size});
      item.has_depth = true;
    }
    set.items.push_back(std::move(item));
  }
  return set;
}

std::vector<Tensor> prepare_pool(const dataio::DepthPool& pool, int size) {
  if (pool.items.empty()) throw Error("depth pool is empty");
  std::vector<Tensor> out;
  out.reserve(pool.items.size());
  for (const auto& item : pool.items) {
    dataio::DepthMap d = item;
    if (d.unit == dataio::DepthUnit::raw_mm) d = dataio::normalize_depth(d);
    Tensor v = d.values;
    if (v.dim(0) != size || v.dim(1) != size) v = dataio::resize_bilinear(v, size, size);
    out.push_back(v.reshaped({1, size, size}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// State

std::vector<nn::Param*> TrainState::pose_params() {
  nn::NamedParams named;
  cpm->collect("cpm", named);
  regression->collect("regression", named);
  depth_reg->collect("depth_regularizer", named);
  std::vector<nn::Param*> out;
  for (auto& [n, p] : named) out.push_back(p);
  return out;
}

std::vector<nn::Param*> TrainState::generator_params() { return generator->parameters(); }

std::vector<nn::Param*> TrainState::discriminator_params() { return discriminator->parameters(); }

TrainState init_state(const ExperimentConfig& config) {
  config.validate();
  TrainState s;
  s.config = config;
  s.rng = Rng(config.seed);

  pose::CpmConfig cpm_cfg;
  cpm_cfg.k = config.k;
  cpm_cfg.in_size = config.image_size;
  cpm_cfg.heatmap_size = config.heatmap_size;
  cpm_cfg.feature_channels = config.pose.feature_channels;
  cpm_cfg.stage_channels = config.pose.stage_channels;
  s.cpm = std::make_unique<pose::CpmNet>(cpm_cfg, s.rng);

  pose::RegressionConfig reg_cfg;
  reg_cfg.k = config.k;
  reg_cfg.heatmap_size = config.heatmap_size;
  reg_cfg.conv_channels = config.pose.reg_conv_channels;
  reg_cfg.fc1 = config.pose.reg_fc1;
  reg_cfg.fc2 = config.pose.reg_fc2;
  s.regression = std::make_unique<pose::RegressionNet>(reg_cfg, s.rng);

  pose::DepthRegularizerConfig dreg_cfg;
  dreg_cfg.k = config.k;
  dreg_cfg.out_size = config.image_size;
  dreg_cfg.channels = config.pose.dreg_channels;
  s.depth_reg = std::make_unique<pose::DepthRegularizerNet>(dreg_cfg, s.rng);

  gan::GeneratorConfig gen_cfg;
  gen_cfg.in_size = config.image_size;
  gen_cfg.base_channels = config.gan.base_channels;
  gen_cfg.residual_blocks = config.gan.residual_blocks;
  s.generator = std::make_unique<gan::GeneratorNet>(gen_cfg, s.rng);

  gan::DiscriminatorConfig disc_cfg;
  disc_cfg.in_size = config.image_size;
  disc_cfg.base_channels = config.gan.base_channels;
  s.discriminator = std::make_unique<gan::DiscriminatorNet>(disc_cfg, s.rng);

  s.opt_pose = std::make_unique<nn::Adam>(s.pose_params(),
                                          nn::Adam::Config{config.train.lr_pose, 0.9, 0.999, 1e-8});
  s.opt_gen = std::make_unique<nn::Adam>(s.generator_params(),
                                         nn::Adam::Config{config.train.lr_gan, 0.9, 0.999, 1e-8});
  s.opt_disc = std::make_unique<nn::Adam>(s.discriminator_params(),
                                          nn::Adam::Config{config.train.lr_gan, 0.9, 0.999, 1e-8});
  return s;
}

// ---------------------------------------------------------------------------
// Logging

TrainLog::TrainLog(const std::string& path) : path_(path) {
  if (path_.empty()) return;
  if (!std::filesystem::exists(path_)) {
    std::ofstream os(path_);
    if (!os) throw IoError("cannot open training log " + path_);
    os << "step,phase,loss_2d,loss_z,loss_dep,loss_task,loss_gan_d,loss_gan_g,total\n";
  }
}

void TrainLog::log(std::int64_t step, Phase phase, const StepLosses& l) {
  if (path_.empty()) return;
  std::ofstream os(path_, std::ios::app);
  char line[256];
  std::snprintf(line, sizeof(line), "%lld,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                static_cast<long long>(step), to_string(phase), l.l_2d, l.l_z, l.l_dep, l.l_task,
                l.l_gan_d, l.l_gan_g, l.total);
  os << line << "\n";
}

// ---------------------------------------------------------------------------
// Batch assembly

namespace {

std::vector<std::size_t> draw_indices(Rng& rng, std::size_t pool_size, int count) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(count));
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(pool_size)));
  return idx;
}

Tensor stack_items(const std::vector<const Tensor*>& parts) {
  std::vector<int> shape = parts.front()->shape();
  shape.insert(shape.begin(), static_cast<int>(parts.size()));
  Tensor out(shape);
  const std::int64_t per = parts.front()->numel();
  for (std::size_t i = 0; i < parts.size(); ++i)
    std::memcpy(out.data() + static_cast<std::int64_t>(i) * per, parts[i]->data(),
                sizeof(double) * static_cast<std::size_t>(per));
  return out;
}

struct PoseBatch {
  Tensor rgb;      // [B,3,H,W]
  Tensor targets;  // [B,K,h,w]
  Tensor z_star;   // [B,K]
  Tensor d_star;   // [B,1,n,n] (only when every item has depth)
};

PoseBatch assemble_pose_batch(const TrainingSet& data, const std::vector<std::size_t>& idx,
                              bool with_depth) {
  std::vector<const Tensor*> rgb, targets, z, d;
  for (std::size_t i : idx) {
    const TrainItem& item = data.items[i];
    rgb.push_back(&item.rgb);
    targets.push_back(&item.heat_targets);
    z.push_back(&item.z_star);
    if (with_depth) d.push_back(&item.d_star);
  }
  PoseBatch b;
  b.rgb = stack_items(rgb);
  b.targets = stack_items(targets);
  b.z_star = stack_items(z);
  if (with_depth) b.d_star = stack_items(d);
  return b;
}

Tensor concat_batch(const Tensor& a, const Tensor& b) {
  std::vector<int> shape = a.shape();
  shape[0] += b.dim(0);
  Tensor out(shape);
  std::memcpy(out.data(), a.data(), sizeof(double) * static_cast<std::size_t>(a.numel()));
  std::memcpy(out.data() + a.numel(), b.data(), sizeof(double) * static_cast<std::size_t>(b.numel()));
  return out;
}

// Pose forward + task-loss backward through cpm/regression/depth_reg. The
// regularizer target d_star is treated as given; grad_d_star (optional)
// receives d(task_scale * lambda_dep * L_dep)/d(d_star).
StepLosses pose_task_pass(TrainState& s, const PoseBatch& batch, const Tensor& d_star,
                          double task_scale, Tensor* grad_d_star) {
  const auto& w = s.config.weights;
  const auto variant = pose::smooth_l1_variant_from_string(s.config.loss_z_variant);
  StepLosses out;

  const Tensor stack = s.cpm->forward(batch.rgb);
  Tensor g_stack;
  out.l_2d = pose::loss_2d(stack, batch.targets, &g_stack);

  const Tensor final_maps = s.cpm->final_heatmaps();
  const Tensor z = s.regression->forward(final_maps);
  Tensor g_z;
  out.l_z = pose::loss_z(z, batch.z_star, variant, &g_z);

  const Tensor d = s.depth_reg->forward(z);
  Tensor g_d;
  out.l_dep = pose::loss_dep(d, d_star, &g_d, grad_d_star);
  out.l_task = pose::task_loss(out.l_z, out.l_2d, out.l_dep, w);

  // Backward. dL/dz comes from both the smooth-L1 term and the regularizer.
  g_d *= task_scale * w.lambda_dep;
  Tensor dz = s.depth_reg->backward(g_d);
  g_z *= task_scale * w.lambda_z;
  dz += g_z;
  const Tensor g_final = s.regression->backward(dz);

  g_stack *= task_scale * w.lambda_2d;
  const int bsz = g_stack.dim(0), stages = g_stack.dim(1);
  const std::int64_t per = g_final.numel() / bsz;
  for (int n = 0; n < bsz; ++n) {
    double* dst = g_stack.data() + ((static_cast<std::int64_t>(n) * stages + (stages - 1)) * per);
    const double* src = g_final.data() + static_cast<std::int64_t>(n) * per;
    for (std::int64_t i = 0; i < per; ++i) dst[i] += src[i];
  }
  s.cpm->backward(g_stack);
  if (grad_d_star) *grad_d_star *= task_scale * w.lambda_dep;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Phases

void init_phase_pose(TrainState& state, const TrainingSet& data, int steps, TrainLog& log) {
  if (data.items.empty()) throw Error("init_phase_pose: empty dataset");
  for (const auto& item : data.items)
    if (!item.has_depth)
      throw Error("init_phase_pose: sample '" + item.id + "' has no ground-truth depth");
  state.phase = Phase::init_pose;
  for (int step = 0; step < steps; ++step) {
    const auto idx =
        draw_indices(state.rng, data.items.size(), state.config.train.batch_size);
    const PoseBatch batch = assemble_pose_batch(data, idx, /*with_depth=*/true);
    state.opt_pose->zero_grad();
    StepLosses losses = pose_task_pass(state, batch, batch.d_star, 1.0, nullptr);
    losses.total = losses.l_task;
    state.opt_pose->step();
    ++state.global_step;
    state.last_losses = losses;
    if (state.config.train.log_every > 0 && state.global_step % state.config.train.log_every == 0)
      log.log(state.global_step, state.phase, losses);
  }
  state.pose_initialized = true;
}

void init_phase_gan(TrainState& state, const TrainingSet& rgb_set, const dataio::DepthPool& pool,
                    int steps, TrainLog& log) {
  if (rgb_set.items.empty()) throw Error("init_phase_gan: empty RGB set");
  if (pool.items.empty()) throw Error("init_phase_gan: empty depth pool");
  state.phase = Phase::init_gan;
  const auto variant = gan::generator_loss_variant_from_string(state.config.gan.generator_loss);
  const std::vector<Tensor> pool_items = prepare_pool(pool, state.config.image_size);
  const int bsz = state.config.train.batch_size;

  for (int step = 0; step < steps; ++step) {
    const auto rgb_idx = draw_indices(state.rng, rgb_set.items.size(), bsz);
    const auto pool_idx = draw_indices(state.rng, pool_items.size(), bsz);

    std::vector<const Tensor*> rgb_parts, real_parts;
    for (std::size_t i : rgb_idx) rgb_parts.push_back(&rgb_set.items[i].rgb);
    for (std::size_t i : pool_idx) real_parts.push_back(&pool_items[i]);
    const Tensor rgb = stack_items(rgb_parts);
    const Tensor real = stack_items(real_parts);

    StepLosses losses;

    // Discriminator ascent.
    const Tensor fake = state.generator->forward(rgb);
    state.opt_disc->zero_grad();
    const Tensor scores = state.discriminator->forward(concat_batch(real, fake));
    Tensor s_real({bsz}), s_fake({bsz});
    for (int i = 0; i < bsz; ++i) {
      s_real[i] = scores[i];
      s_fake[i] = scores[bsz + i];
    }
    Tensor g_real, g_fake;
    losses.l_gan_d = gan::gan_loss_discriminator(s_real, s_fake, &g_real, &g_fake);
    Tensor g_scores({2 * bsz});
    for (int i = 0; i < bsz; ++i) {
      g_scores[i] = -g_real[i];  // ascend = descend the negation
      g_scores[bsz + i] = -g_fake[i];
    }
    state.discriminator->backward(g_scores);
    state.opt_disc->step();

    // Generator descent (unless frozen for diagnostics).
    if (!state.config.train.freeze_generator) {
      state.opt_gen->zero_grad();
      const Tensor scores_f = state.discriminator->forward(fake);
      Tensor g_s;
      losses.l_gan_g = gan::gan_loss_generator(scores_f, variant, &g_s);
      const Tensor d_fake = state.discriminator->backward(g_s);
      state.generator->backward(d_fake);
      state.opt_gen->step();
    }

    losses.total = losses.l_gan_d + losses.l_gan_g;
    ++state.global_step;
    state.last_losses = losses;
    if (state.config.train.log_every > 0 && state.global_step % state.config.train.log_every == 0)
      log.log(state.global_step, state.phase, losses);
  }
  state.gan_initialized = true;
}

StepLosses joint_step(TrainState& state, const TrainingSet& task_set,
                      const std::vector<Tensor>& pool_normalized, JointStepTrace* trace) {
  const auto& cfg = state.config;
  const auto& w = cfg.weights;
  const auto variant = gan::generator_loss_variant_from_string(cfg.gan.generator_loss);
  const int bsz = cfg.train.batch_size;

  const auto idx = draw_indices(state.rng, task_set.items.size(), bsz);
  const auto pool_idx = draw_indices(state.rng, pool_normalized.size(), bsz);
  const PoseBatch batch = assemble_pose_batch(task_set, idx, /*with_depth=*/false);
  std::vector<const Tensor*> real_parts;
  for (std::size_t i : pool_idx) real_parts.push_back(&pool_normalized[i]);
  const Tensor real = stack_items(real_parts);

  StepLosses losses;

  // Generator output serves as both the discriminator's fake batch and the
  // depth-regularizer target for this iteration.
  const Tensor fake = state.generator->forward(batch.rgb);

  // (a) Discriminator ascent on lambda_g * L_GAN.
  state.opt_disc->zero_grad();
  {
    const Tensor scores = state.discriminator->forward(concat_batch(real, fake));
    Tensor s_real({bsz}), s_fake({bsz});
    for (int i = 0; i < bsz; ++i) {
      s_real[i] = scores[i];
      s_fake[i] = scores[bsz + i];
    }
    Tensor g_real, g_fake;
    losses.l_gan_d = gan::gan_loss_discriminator(s_real, s_fake, &g_real, &g_fake);
    Tensor g_scores({2 * bsz});
    for (int i = 0; i < bsz; ++i) {
      g_scores[i] = -w.lambda_g * g_real[i];
      g_scores[bsz + i] = -w.lambda_g * g_fake[i];
    }
    state.discriminator->backward(g_scores);
    state.opt_disc->step();
  }

  if (trace) {
    for (nn::Param* p : state.discriminator_params()) trace->disc_after_ascent.push_back(p->value);
    for (nn::Param* p : state.pose_params()) trace->pose_after_ascent.push_back(p->value);
    for (nn::Param* p : state.generator_params()) trace->gen_after_ascent.push_back(p->value);
  }

  // (b) Joint descent on lambda_t * L_task + lambda_g * L_GAN (generator
  // side) through the pose module and the generator together.
  state.opt_pose->zero_grad();
  state.opt_gen->zero_grad();

  Tensor g_d_star;
  const bool reg_to_gen = cfg.train.regularizer_grad_to_generator;
  const StepLosses task = pose_task_pass(state, batch, fake, w.lambda_t,
                                         reg_to_gen ? &g_d_star : nullptr);
  losses.l_2d = task.l_2d;
  losses.l_z = task.l_z;
  losses.l_dep = task.l_dep;
  losses.l_task = task.l_task;

  const Tensor scores_f = state.discriminator->forward(fake);
  Tensor g_s;
  losses.l_gan_g = gan::gan_loss_generator(scores_f, variant, &g_s);
  g_s *= w.lambda_g;
  Tensor d_fake = state.discriminator->backward(g_s);
  if (reg_to_gen) d_fake += g_d_star;
  state.generator->backward(d_fake);

  state.opt_pose->step();
  state.opt_gen->step();

  losses.total = w.lambda_t * losses.l_task + w.lambda_g * losses.l_gan_g;
  return losses;
}

void joint_finetune(TrainState& state, const TrainingSet& task_set, const dataio::DepthPool& pool,
                    int steps, TrainLog& log) {
  if (!state.config.train.skip_init_check && (!state.pose_initialized || !state.gan_initialized))
    throw Error(
        "joint_finetune: both init phases must complete first (or set train.skip_init_check)");
  if (task_set.items.empty()) throw Error("joint_finetune: empty task set");
  if (pool.items.empty()) throw Error("joint_finetune: empty depth pool");
  state.phase = Phase::joint;
  const std::vector<Tensor> pool_items = prepare_pool(pool, state.config.image_size);
  for (int step = 0; step < steps; ++step) {
    const StepLosses losses = joint_step(state, task_set, pool_items);
    ++state.global_step;
    state.last_losses = losses;
    if (state.config.train.log_every > 0 && state.global_step % state.config.train.log_every == 0)
      log.log(state.global_step, state.phase, losses);
  }
}

}  // namespace dggan::train
