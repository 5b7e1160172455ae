#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "dggan/core/errors.hpp"
#include "dggan/train/trainer.hpp"

namespace dggan::train {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'G', 'A', 'N', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw CheckpointError("corrupt checkpoint: truncated");
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw CheckpointError("corrupt checkpoint: truncated");
  return v;
}

void write_array(std::ostream& os, const std::string& name, const Tensor& t) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(os, static_cast<std::uint32_t>(t.ndim()));
  for (int d : t.shape()) {
    const std::int32_t v = d;
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.numel())));
}

std::pair<std::string, Tensor> read_array(std::istream& is) {
  const std::uint32_t name_len = read_u32(is);
  if (name_len > 4096) throw CheckpointError("corrupt checkpoint: bad name length");
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  const std::uint32_t ndim = read_u32(is);
  if (ndim > 8) throw CheckpointError("corrupt checkpoint: bad rank");
  std::vector<int> shape(ndim);
  for (auto& d : shape) {
    std::int32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    d = v;
  }
  Tensor t(shape);
  is.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.numel())));
  if (!is) throw CheckpointError("corrupt checkpoint: truncated array '" + name + "'");
  return {name, std::move(t)};
}

nn::NamedParams all_named_params(TrainState& s) {
  nn::NamedParams named;
  s.cpm->collect("cpm", named);
  s.regression->collect("regression", named);
  s.depth_reg->collect("depth_regularizer", named);
  s.generator->collect("generator", named);
  s.discriminator->collect("discriminator", named);
  return named;
}

void append_optimizer_arrays(const std::string& prefix, nn::Adam& opt,
                             std::vector<std::pair<std::string, const Tensor*>>& arrays) {
  char name[64];
  for (std::size_t i = 0; i < opt.size(); ++i) {
    std::snprintf(name, sizeof(name), "%s.m.%04zu", prefix.c_str(), i);
    arrays.emplace_back(name, &opt.m(i));
    std::snprintf(name, sizeof(name), "%s.v.%04zu", prefix.c_str(), i);
    arrays.emplace_back(name, &opt.v(i));
  }
}

void restore_optimizer(const std::string& prefix, nn::Adam& opt,
                       const std::map<std::string, Tensor>& arrays) {
  char name[64];
  for (std::size_t i = 0; i < opt.size(); ++i) {
    std::snprintf(name, sizeof(name), "%s.m.%04zu", prefix.c_str(), i);
    const auto mi = arrays.find(name);
    std::snprintf(name, sizeof(name), "%s.v.%04zu", prefix.c_str(), i);
    const auto vi = arrays.find(name);
    if (mi == arrays.end() || vi == arrays.end())
      throw CheckpointError("corrupt checkpoint: missing optimizer slot for " + prefix);
    if (mi->second.numel() != opt.m(i).numel() || vi->second.numel() != opt.v(i).numel())
      throw CheckpointError("corrupt checkpoint: optimizer slot shape mismatch in " + prefix);
    opt.m(i) = mi->second;
    opt.v(i) = vi->second;
  }
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  TrainState& s = const_cast<TrainState&>(state);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for write: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);

  nlohmann::json header = {
      {"config", config_to_json(state.config)},
      {"phase", to_string(state.phase)},
      {"global_step", state.global_step},
      {"pose_initialized", state.pose_initialized},
      {"gan_initialized", state.gan_initialized},
      {"rng", state.rng.serialize()},
      {"opt_t",
       {{"pose", state.opt_pose->t()}, {"gen", state.opt_gen->t()}, {"disc", state.opt_disc->t()}}},
      {"last_losses",
       {{"l_2d", state.last_losses.l_2d},
        {"l_z", state.last_losses.l_z},
        {"l_dep", state.last_losses.l_dep},
        {"l_task", state.last_losses.l_task},
        {"l_gan_d", state.last_losses.l_gan_d},
        {"l_gan_g", state.last_losses.l_gan_g},
        {"total", state.last_losses.total}}},
  };
  const std::string header_str = header.dump();
  write_u32(os, static_cast<std::uint32_t>(header_str.size()));
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  std::vector<std::pair<std::string, const Tensor*>> arrays;
  for (auto& [name, p] : all_named_params(s)) arrays.emplace_back(name, &p->value);
  append_optimizer_arrays("opt_pose", *s.opt_pose, arrays);
  append_optimizer_arrays("opt_gen", *s.opt_gen, arrays);
  append_optimizer_arrays("opt_disc", *s.opt_disc, arrays);

  write_u64(os, arrays.size());
  for (const auto& [name, t] : arrays) write_array(os, name, *t);
  if (!os) throw IoError("checkpoint write failed: " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path, const ExperimentConfig* expect) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file: " + path.string());
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw CheckpointError("checkpoint version mismatch: file has v" + std::to_string(version) +
                          ", expected v" + std::to_string(kVersion));
  const std::uint32_t header_len = read_u32(is);
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), header_len);
  if (!is) throw CheckpointError("corrupt checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  const ExperimentConfig config = config_from_json(header.at("config"));
  if (expect) check_structural_match(config, *expect);

  TrainState state = init_state(config);
  state.phase = phase_from_string(header.at("phase").get<std::string>());
  state.global_step = header.at("global_step").get<std::int64_t>();
  state.pose_initialized = header.at("pose_initialized").get<bool>();
  state.gan_initialized = header.at("gan_initialized").get<bool>();
  state.rng = Rng::deserialize(header.at("rng").get<std::string>());
  const auto& ll = header.at("last_losses");
  state.last_losses.l_2d = ll.value("l_2d", 0.0);
  state.last_losses.l_z = ll.value("l_z", 0.0);
  state.last_losses.l_dep = ll.value("l_dep", 0.0);
  state.last_losses.l_task = ll.value("l_task", 0.0);
  state.last_losses.l_gan_d = ll.value("l_gan_d", 0.0);
  state.last_losses.l_gan_g = ll.value("l_gan_g", 0.0);
  state.last_losses.total = ll.value("total", 0.0);

  const std::uint64_t count = read_u64(is);
  std::map<std::string, Tensor> arrays;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto [name, t] = read_array(is);
    arrays.emplace(std::move(name), std::move(t));
  }

  for (auto& [name, p] : all_named_params(state)) {
    const auto it = arrays.find(name);
    if (it == arrays.end())
      throw CheckpointError("corrupt checkpoint: missing parameter '" + name + "'");
    if (it->second.shape() != p->value.shape())
      throw CheckpointError("corrupt checkpoint: shape mismatch for '" + name + "'");
    p->value = it->second;
  }
  restore_optimizer("opt_pose", *state.opt_pose, arrays);
  restore_optimizer("opt_gen", *state.opt_gen, arrays);
  restore_optimizer("opt_disc", *state.opt_disc, arrays);
  state.opt_pose->set_t(header.at("opt_t").at("pose").get<std::int64_t>());
  state.opt_gen->set_t(header.at("opt_t").at("gen").get<std::int64_t>());
  state.opt_disc->set_t(header.at("opt_t").at("disc").get<std::int64_t>());
  return state;
}

}  // namespace dggan::train
