#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace srde {

/// SplitMix64 finalizer. Used both as a hash and as the seed-splitting function.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the `index`-th independent child stream of `master`.
///
/// Trial seeds, cell seeds and per-worker streams are all derived this way so
/// that results depend only on (master seed, index) and never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Counter-based standard normal generator.
///
/// The variate for (step, channel) is a pure function of the seed, so a noise
/// realization can be replayed in any order, restricted to a subset of modes,
/// or shared between a solver and an independent re-computation.
class CounterNormal {
 public:
  constexpr explicit CounterNormal(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] double operator()(std::uint64_t step, std::uint64_t channel) const noexcept {
    // Box-Muller on a pair of channels; even channels take the cosine branch.
    const std::uint64_t pair = channel >> 1;
    std::uint64_t key = splitmix64(seed_ ^ (step * 0xD1B54A32D192ED03ULL));
    key = splitmix64(key ^ (pair * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL));
    const double u1 = to_unit_open(key);
    const double u2 = to_unit_open(splitmix64(key));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (channel & 1U) == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
  }

 private:
  // Uniform on (0, 1): 53 random mantissa bits offset by half an ulp.
  static double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
};

/// FNV-1a accumulator for reproducibility digests.
class Digest {
 public:
  Digest& bytes(const void* data, std::size_t size) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001B3ULL;
    }
    return *this;
  }
  template <typename T>
  Digest& value(const T& v) noexcept {
    return bytes(&v, sizeof(T));
  }
  [[nodiscard]] std::uint64_t get() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

}  // namespace srde
