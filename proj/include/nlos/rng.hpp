#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace nlos {

/// SplitMix64 step. Used both as a stand-alone mixer and to seed streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic counter-free PRNG (xoshiro256++). The standard library
/// distributions are implementation-defined, so sampling here is hand rolled
/// to keep outputs identical across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { reseed(seed); }

  /// Independent substream, e.g. one per frame or per object.
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s = mixed ^ (stream * 0x9e3779b97f4a7c15ull);
    reseed(splitmix64(s));
  }

  std::uint64_t next_u64() {
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

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here (n << 2^64).
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller on raw uniform draws.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex normal with total variance sigma2.
  std::complex<double> complex_gaussian(double sigma2) {
    const double s = std::sqrt(0.5 * sigma2);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

  /// Exponential with the given mean (power of complex Gaussian noise).
  double exponential(double mean) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -mean * std::log(u);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
    have_spare_ = false;
  }

  std::uint64_t s_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nlos
