#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "riskmppi/types.hpp"

// Counter-based random numbers (Philox 4x32-10, Salmon et al. 2011).
// Every draw is a pure function of (seed, stream, a, b, index), so samples
// can be generated on any number of workers, in any order, and still come
// out bit-identical.

namespace riskmppi {

struct Philox4x32 {
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const std::array<std::uint32_t, 4> next = {
          static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
          static_cast<std::uint32_t>(p0)};
      ctr = next;
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

// Stream ids keep unrelated consumers of the same seed decorrelated.
enum : std::uint32_t {
  kStreamPerturbation = 1,
  kStreamPlantNoise = 2,
  kStreamSpecGen = 3,
};

// Uniform double in (0, 1].
inline double philox_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double uniform_draw(std::uint64_t seed, std::uint32_t stream,
                           std::uint32_t a, std::uint32_t b,
                           std::uint32_t index) {
  const auto out = Philox4x32::block(
      {index, a, b, stream},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  // Half-open [0, 1).
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct GaussianPair {
  double z0;
  double z1;
};

// Two independent standard normals from one Philox block (Box-Muller).
inline GaussianPair gaussian_draw(std::uint64_t seed, std::uint32_t stream,
                                  std::uint32_t a, std::uint32_t b,
                                  std::uint32_t index) {
  const auto out = Philox4x32::block(
      {index, a, b, stream},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t u_bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t v_bits =
      (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  const double r = std::sqrt(-2.0 * std::log(philox_unit(u_bits)));
  const double theta =
      2.0 * 3.14159265358979323846 * static_cast<double>(v_bits >> 11) * 0x1.0p-53;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// Sequential convenience wrapper for single-threaded consumers (plant noise,
// spec generation). Counter-based underneath, so replay is exact.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t a,
                 std::uint32_t b = 0)
      : seed_(seed), stream_(stream), a_(a), b_(b) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const GaussianPair p = gaussian_draw(seed_, stream_, a_, b_, index_++);
    spare_ = p.z1;
    have_spare_ = true;
    return p.z0;
  }

  Vec3 next_vec3() {
    const double x = next();
    const double y = next();
    const double z = next();
    return {x, y, z};
  }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint32_t a_;
  std::uint32_t b_;
  std::uint32_t index_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace riskmppi
