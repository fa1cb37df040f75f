#pragma once

#include <cmath>
#include <cstdint>

namespace smeq {

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based random stream. A stream is identified by a 128-bit key and a
/// 64-bit draw counter; the output is a stateless mix of (key, counter), so a
/// stream keyed by (root seed, tree path) yields the same draws no matter in
/// which order the tree is traversed or how replicas are scheduled on threads.
class RngStream {
 public:
  RngStream() : key_hi_(0), key_lo_(0), ctr_(0) {}

  static RngStream from_root_seed(uint64_t seed) {
    RngStream s;
    s.key_lo_ = detail::mix64(seed + 0x9e3779b97f4a7c15ULL);
    s.key_hi_ = detail::mix64(seed ^ 0xc2b2ae3d27d4eb4fULL);
    s.ctr_ = 0;
    return s;
  }

  /// Sub-stream for path digit (or domain tag) `j`. Extending the key digit
  /// by digit is the 128-bit path hash; counters start fresh.
  RngStream child(uint64_t j) const {
    RngStream s;
    s.key_lo_ = detail::mix64(key_lo_ ^ (0x9e3779b97f4a7c15ULL * (j + 1)));
    s.key_hi_ = detail::mix64(key_hi_ + 0x165667b19e3779f9ULL * (j + 2) + s.key_lo_);
    s.ctr_ = 0;
    return s;
  }

  uint64_t next_u64() {
    const uint64_t c = ctr_++;
    const uint64_t a = detail::mix64(key_lo_ + 0x9e3779b97f4a7c15ULL * (c + 1));
    const uint64_t b = detail::mix64(key_hi_ ^ (a + 0x632be59bd9b4e019ULL));
    return detail::mix64(a + (b ^ (c * 0xd1342543de82ef95ULL)));
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe under log().
  double next_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) {
    // multiply-shift; bias < 2^-64 * n, irrelevant at Monte Carlo scales
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u = next_open01();
    const double v = next_double();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.283185307179586476925286766559 * v;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate = 1.0) { return -std::log(next_open01()) / rate; }

  /// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = next_open01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_open01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  uint64_t key_hi() const { return key_hi_; }
  uint64_t key_lo() const { return key_lo_; }

 private:
  uint64_t key_hi_, key_lo_, ctr_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace smeq
