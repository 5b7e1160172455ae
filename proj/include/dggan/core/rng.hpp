#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace dggan {

// Deterministic RNG with explicitly defined draw algorithms, so that streams
// are reproducible across standard-library implementations and the full state
// (engine + Box-Muller spare) can be serialized into checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0, n)
  std::int64_t uniform_int(std::int64_t n) {
    assert(n > 0);
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller; the spare is part of the state.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << " " << (has_spare_ ? 1 : 0) << " " << std::hexfloat << spare_;
    return os.str();
  }

  static Rng deserialize(const std::string& s) {
    Rng r;
    std::istringstream is(s);
    is >> r.engine_;
    int spare_flag = 0;
    is >> spare_flag;
    r.has_spare_ = spare_flag != 0;
    // std::hexfloat extraction is unreliable pre-C++23; parse manually.
    std::string hex;
    is >> hex;
    if (!hex.empty()) r.spare_ = std::strtod(hex.c_str(), nullptr);
    return r;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dggan
