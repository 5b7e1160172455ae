#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dggan/dataio/types.hpp"

namespace dggan::dataio {

enum class DatasetLayout { rhd_like, stb_like, mhp_like, fixture };
enum class Split { train, eval };

const char* to_string(DatasetLayout layout);
const char* to_string(Split split);
DatasetLayout layout_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct LoadOptions {
  // When false, depth files are never opened and all samples report depth
  // absent (used by training phases that must not touch ground-truth depth).
  bool with_depth = true;
};

// Reads a manifest-driven dataset root. Samples come back in split-manifest
// order; records without a depth entry (mhp_like) have depth absent.
std::vector<HandSample> load_dataset(const std::filesystem::path& root, DatasetLayout layout,
                                     Split split, const LoadOptions& options = {});

// All depth maps of a split, as a pool for unpaired adversarial training.
DepthPool load_depth_pool(const std::filesystem::path& root, DatasetLayout layout, Split split);

}  // namespace dggan::dataio
