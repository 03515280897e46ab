#ifndef PASLAB_RNG_HPP
#define PASLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "paslab/common.hpp"

namespace paslab {

// Counter-based stream: output i is a pure function of (key, i), so independent
// streams can be drawn for every (experiment point, stage) without coordination
// between workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) {
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  bool next_bit() { return (next_u64() >> 63) != 0; }

  // standard normal via Box-Muller (deterministic across platforms)
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  cdouble next_circular_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    return {s * next_gaussian(), s * next_gaussian()};
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next_below(i)]);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over a canonical tag string; used to derive per-stage stream keys from
// the master seed so that worker count and evaluation order cannot change them.
inline std::uint64_t stream_key(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ RngStream::mix(master);
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return RngStream::mix(h);
}

inline std::vector<std::uint32_t> random_permutation(std::size_t n, std::uint64_t key) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  RngStream rng(key);
  rng.shuffle(p);
  return p;
}

}  // namespace paslab

#endif
