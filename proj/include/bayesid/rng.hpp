#pragma once

// Portable random streams. The standard library's distributions are
// implementation-defined, so noise is generated from xoshiro256++ with
// hand-written transforms to stay bit-identical across toolchains.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bayesid::rng {

/// SplitMix64, used only to expand a 64-bit seed into xoshiro state.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256++ 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256pp(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Uniform on the open interval (0, 1): 53-bit mantissa, midpoint-offset.
inline double uniform_open(Xoshiro256pp& gen) noexcept {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unit normal samples via Box-Muller; the second variate of each pair is cached.
class StandardNormal {
 public:
  double operator()(Xoshiro256pp& gen) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open(gen);
    const double u2 = uniform_open(gen);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Zero-mean Laplace with scale b = 1/sqrt(2) (unit variance), by inverse CDF.
inline double unit_laplace(Xoshiro256pp& gen) {
  const double u = uniform_open(gen) - 0.5;
  const double b = 1.0 / std::numbers::sqrt2;
  return u < 0.0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
}

}  // namespace bayesid::rng
