#include "dggan/dataio/dataset.hpp"

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dggan/core/errors.hpp"
#include "dggan/dataio/image_io.hpp"

namespace dggan::dataio {

const char* to_string(DatasetLayout layout) {
  switch (layout) {
    case DatasetLayout::rhd_like: return "rhd_like";
    case DatasetLayout::stb_like: return "stb_like";
    case DatasetLayout::mhp_like: return "mhp_like";
    case DatasetLayout::fixture: return "fixture";
  }
  return "?";
}

const char* to_string(Split split) { return split == Split::train ? "train" : "eval"; }

DatasetLayout layout_from_string(const std::string& s) {
  if (s == "rhd_like") return DatasetLayout::rhd_like;
  if (s == "stb_like") return DatasetLayout::stb_like;
  if (s == "mhp_like") return DatasetLayout::mhp_like;
  if (s == "fixture") return DatasetLayout::fixture;
  throw ConfigError("unknown dataset layout '" + s + "'");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "eval") return Split::eval;
  throw ConfigError("unknown split '" + s + "'");
}

namespace {

nlohmann::json read_manifest(const std::filesystem::path& root, DatasetLayout layout) {
  const auto manifest_path = root / "manifest.json";
  if (!std::filesystem::exists(manifest_path))
    throw LayoutMismatchError("layout mismatch: no manifest.json under " + root.string());
  std::ifstream is(manifest_path);
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw LayoutMismatchError("layout mismatch: unreadable manifest in " + root.string() + ": " +
                              e.what());
  }
  const std::string declared = manifest.value("layout", "");
  if (declared != to_string(layout))
    throw LayoutMismatchError("layout mismatch: root declares '" + declared + "', requested '" +
                              std::string(to_string(layout)) + "'");
  return manifest;
}

void load_keypoints(const std::filesystem::path& path, int k, Tensor& kp2d, Tensor& kp3d) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open keypoints " + path.string());
  kp2d = Tensor({k, 2});
  kp3d = Tensor({k, 3});
  std::string line;
  int row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= k) throw IoError("too many keypoint rows in " + path.string());
    std::istringstream ls(line);
    double u, v, x, y, z;
    if (!(ls >> u >> v >> x >> y >> z)) throw IoError("bad keypoint row in " + path.string());
    kp2d.at(row, 0) = u;
    kp2d.at(row, 1) = v;
    kp3d.at(row, 0) = x;
    kp3d.at(row, 1) = y;
    kp3d.at(row, 2) = z;
    ++row;
  }
  if (row != k)
    throw IoError("expected " + std::to_string(k) + " keypoint rows, got " + std::to_string(row));
}

}  // namespace

std::vector<HandSample> load_dataset(const std::filesystem::path& root, DatasetLayout layout,
                                     Split split, const LoadOptions& options) {
  const nlohmann::json manifest = read_manifest(root, layout);
  const int k = manifest.value("k", kDefaultJointCount);

  std::map<std::string, nlohmann::json> by_id;
  for (const auto& rec : manifest.at("records")) by_id[rec.at("id").get<std::string>()] = rec;

  std::vector<std::string> ids;
  if (manifest.contains("splits")) {
    for (const auto& id : manifest.at("splits").at(to_string(split)))
      ids.push_back(id.get<std::string>());
  } else {
    for (const auto& [id, rec] : by_id) ids.push_back(id);
  }

  std::vector<HandSample> samples;
  samples.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw RecordError(id, "listed in split but missing from records");
    const nlohmann::json& rec = it->second;
    try {
      HandSample s;
      s.source_id = id;
      s.rgb = read_ppm8(root / rec.at("rgb").get<std::string>());
      load_keypoints(root / rec.at("keypoints").get<std::string>(), k, s.keypoints2d,
                     s.keypoints3d);
      const auto& intr = rec.at("intrinsics");
      s.intrinsics.fx = intr.at("fx").get<double>();
      s.intrinsics.fy = intr.at("fy").get<double>();
      s.intrinsics.cx = intr.at("cx").get<double>();
      s.intrinsics.cy = intr.at("cy").get<double>();
      s.hand_side =
          rec.value("hand_side", "right") == std::string("left") ? HandSide::left : HandSide::right;
      if (options.with_depth && rec.contains("depth")) {
        DepthMap d;
        d.values = read_pgm16(root / rec.at("depth").get<std::string>());
        d.unit = DepthUnit::raw_mm;
        s.depth = std::move(d);
      }
      samples.push_back(std::move(s));
    } catch (const RecordError&) {
      throw;
    } catch (const std::exception& e) {
      throw RecordError(id, e.what());
    }
  }
  return samples;
}

DepthPool load_depth_pool(const std::filesystem::path& root, DatasetLayout layout, Split split) {
  const nlohmann::json manifest = read_manifest(root, layout);

  std::map<std::string, nlohmann::json> by_id;
  for (const auto& rec : manifest.at("records")) by_id[rec.at("id").get<std::string>()] = rec;

  std::vector<std::string> ids;
  if (manifest.contains("splits")) {
    for (const auto& id : manifest.at("splits").at(to_string(split)))
      ids.push_back(id.get<std::string>());
  } else {
    for (const auto& [id, rec] : by_id) ids.push_back(id);
  }

  DepthPool pool;
  pool.origin = root.string();
  for (const std::string& id : ids) {
    const nlohmann::json& rec = by_id.at(id);
    if (!rec.contains("depth")) continue;
    try {
      DepthMap d;
      d.values = read_pgm16(root / rec.at("depth").get<std::string>());
      d.unit = DepthUnit::raw_mm;
      pool.items.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw RecordError(id, e.what());
    }
  }
  return pool;
}

}  // namespace dggan::dataio
