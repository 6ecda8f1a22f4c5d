#pragma once

/// \file rng.hpp
/// Counter-based, splittable 64-bit generator.
///
/// Output i of a stream with key k is mix64(k + (i + 1) * golden), so any
/// draw can be computed directly from (key, index) without replaying the
/// stream. Edge weights and per-trial streams both rely on this.

#include <cmath>
#include <cstdint>
#include <limits>

namespace smf {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a base seed and an index.
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ mix64(index + kGolden));
}

/// Maps 64 random bits to a double in (0, 1].
constexpr double to_unit_open_closed(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return at(counter_++); }

  /// The draw at a fixed position, independent of the current counter.
  [[nodiscard]] constexpr result_type at(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGolden);
  }

  double uniform() noexcept { return to_unit_open_closed((*this)()); }

  /// Inverse-CDF exponential draw, -mean * ln(U) with U in (0, 1].
  double exponential(double mean) noexcept { return -mean * std::log(uniform()); }

  /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace smf
