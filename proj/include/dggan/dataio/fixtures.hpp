#pragma once

#include <filesystem>

namespace dggan::dataio {

// Writes a deterministic synthetic dataset in the `fixture` layout: an
// articulated 21-joint hand (capsule bones on a kinematic tree) rendered to a
// shaded RGB image plus an exact z-buffer depth map, with consistent 2D/3D
// keypoints and pinhole intrinsics. The last eval_count records form the eval
// split; the rest are the train split.
void gen_fixtures(int count, int image_size, std::uint64_t seed,
                  const std::filesystem::path& out_root, int eval_count = 0);

}  // namespace dggan::dataio
