#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oss {

// SplitMix64 finalizer. Used to derive independent child seeds from a single
// user-facing seed so that every repetition / batch / component gets its own
// stream and results do not depend on evaluation order.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Child seed for stream `stream` of `seed`. Chain calls for nested streams:
/// derive_stream(derive_stream(seed, rep), component).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

// Stream tags for the components that consume randomness. Keeping them in one
// place guarantees two components never alias the same child stream.
namespace stream {
constexpr std::uint64_t kCovariates = 1;
constexpr std::uint64_t kResponse = 2;
constexpr std::uint64_t kBatchShuffle = 3;
constexpr std::uint64_t kUniformSelect = 4;
constexpr std::uint64_t kBootstrapResample = 5;
}  // namespace stream

/// Seeded generator with fixed draw algorithms.
///
/// std::mt19937_64 output is pinned by the standard, but the standard
/// *distributions* are not, so uniform and normal variates are produced here
/// with explicit transforms. Identical seeds give identical streams on any
/// conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); 53-bit resolution, never 0 or 1.
  double next_unit() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Uniform on (lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Standard normal via Box-Muller; the paired variate is cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Unbiased integer in [0, bound) via mask rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t value;
    do {
      value = engine_() & mask;
    } while (value >= bound);
    return value;
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace oss
