#pragma once

#include <cstdint>
#include <random>

namespace thresholds {

/// Seeded generator with a fixed, platform-independent output sequence
/// (64-bit Mersenne Twister; uniforms built from the top 53 bits, normals by
/// inversion).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream `index` of a master seed (splitmix64 mixing).
  static Rng substream(std::uint64_t master, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  /// Uniform on the open interval (0,1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace thresholds
