#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace xids {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter-based generator.
/// Each output is a fixed bijective mix of `seed + k * 0x9e3779b97f4a7c15`, so
/// streams are reproducible bit-for-bit on every platform. All randomized
/// operations in the library draw from this generator; the standard library
/// distributions are avoided because their algorithms are implementation
/// defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform integer in [0, bound) by rejection; `bound` must be > 0.
  std::uint64_t uniform(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Fisher-Yates shuffle, iterating from the back.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// The SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Seed for an independent sub-stream `stream` of `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
  return SplitMix64::mix(master ^ SplitMix64::mix(stream + 0x9e3779b97f4a7c15ULL));
}

}  // namespace xids
