#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

#include "baryopt/linalg.hpp"

// Portable, seedable random number generation. The standard library's
// distributions are not bit-reproducible across implementations, so traces
// that promise byte-identical replay use the fixed algorithms below:
// splitmix64 for seeding/stream derivation, xoshiro256++ for uniforms, and
// the Box-Muller transform for Gaussians. The combination is recorded in
// trace metadata as "xoshiro256++ / splitmix64 streams / box-muller".

namespace baryopt {

/// splitmix64 step (Vigna); used only to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ (Blackman & Vigna), seeded via splitmix64.
class Xoshiro256pp {
 public:
  /// Stream-split rule: stream k of seed s starts from the splitmix64
  /// expansion of s + k * golden_gamma, so distinct (seed, stream) pairs
  /// yield decorrelated generators and stream 0 is the plain seed.
  explicit Xoshiro256pp(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed + stream * 0x9E3779B97F4A7C15ULL;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Standard-normal stream built on Box-Muller over xoshiro256++ uniforms.
/// Draw order is fixed (cosine branch first), so a seeded stream replays
/// identically regardless of how callers batch their requests.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed, std::uint64_t stream = 0)
      : rng_(seed, stream) {}

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the logarithm finite.
    const double u1 =
        (static_cast<double>(rng_.next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Vector of independent standard normals, component order fixed.
  Vec normal_vec(std::size_t dim) {
    Vec v(dim);
    for (auto& x : v) x = normal();
    return v;
  }

  double uniform() { return rng_.uniform(); }

 private:
  Xoshiro256pp rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace baryopt
