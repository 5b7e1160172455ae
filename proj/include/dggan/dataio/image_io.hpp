#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dggan/core/tensor.hpp"

namespace dggan::dataio {

// Binary PPM (P6, 8-bit) for RGB, binary PGM (P5, 16-bit big-endian) for
// depth in millimeters. Lossless, self-describing, no external codecs.

void write_ppm8(const std::filesystem::path& path, const Tensor& rgb);  // [H,W,3] in [0,1]
Tensor read_ppm8(const std::filesystem::path& path);

void write_pgm16(const std::filesystem::path& path, const Tensor& values, double scale = 1.0);
Tensor read_pgm16(const std::filesystem::path& path, double scale = 1.0);

// Every 16-bit depth file read in this process is recorded here, so tests and
// the trainer can assert which phases touched ground-truth depth on disk.
std::size_t depth_read_count();
std::vector<std::string> depth_read_paths();
void clear_depth_read_trace();

// Counts trace entries whose path lies under `root`.
std::size_t depth_reads_under(const std::filesystem::path& root);

}  // namespace dggan::dataio
