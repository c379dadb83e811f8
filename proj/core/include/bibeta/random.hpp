#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace bibeta {

/// Seed used whenever the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20240101;

/// SplitMix64 finalizer. Used to expand a 64-bit seed into generator state
/// and to derive child seeds for independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed for stream `index` under `root`. Distinct indices
/// give statistically independent streams, so parallel work can be
/// partitioned without depending on scheduling order.
constexpr std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

/// xoshiro256++ generator; satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s = splitmix64(s);
      word = s;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform variate strictly inside (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) noexcept {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gamma(shape, 1) variate on the log scale (Marsaglia-Tsang squeeze, with the
/// U^(1/shape) boost for shape < 1). Working on the log scale keeps tiny
/// shapes from underflowing to an exact zero.
double log_gamma_variate(Rng& rng, double shape);

inline double gamma_variate(Rng& rng, double shape) {
  return std::exp(log_gamma_variate(rng, shape));
}

}  // namespace bibeta
