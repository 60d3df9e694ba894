#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace rfiforge {

namespace detail {

/// SplitMix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based pseudo-random stream with O(1) child-stream derivation.
///
/// Output i is mix64(key + (i+1)*gamma), so a stream is a pure function of
/// its key. Child streams are keyed by hashing (parent key, tag); forking
/// never consumes parent state, which keeps per-trial streams identical
/// whether trials run serially or on worker threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(key_ + counter_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe under log().
  double next_open_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// N(0, 1) via Box-Muller (cosine branch).
  double gaussian() {
    const double r = std::sqrt(-2.0 * std::log(next_open_unit()));
    return r * std::cos(2.0 * 3.14159265358979323846 * next_unit());
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  /// Circular complex normal CN(0, sigma^2): real and imaginary parts are
  /// independent N(0, sigma^2/2), so E|z|^2 = sigma^2.
  std::complex<double> circular_gaussian(double sigma) {
    const double r = sigma * std::sqrt(-std::log(next_open_unit()));
    const double theta = 2.0 * 3.14159265358979323846 * next_unit();
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  RngStream fork(std::uint64_t tag) const {
    return RngStream(detail::mix64(detail::mix64(key_ ^ 0xA0761D6478BD642FULL) + tag));
  }

  RngStream fork(std::string_view label) const { return fork(detail::fnv1a64(label)); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Key of the stream fork chain base -> tag, for seeding per-trial work.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return RngStream(base).fork(tag).key();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t tag) {
  return RngStream(base).fork(label).fork(tag).key();
}

}  // namespace rfiforge
