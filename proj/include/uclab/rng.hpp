#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of
// (seed, stream id, counter), so parallel consumers can pull from disjoint
// counter ranges and reruns reproduce byte-identical values regardless of
// scheduling.

namespace uclab::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(splitmix64(splitmix64(seed) ^ 0x5851f42d4c957f2dull) ^
             splitmix64(stream_id)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter + 0x9e3779b97f4a7c15ull));
  }

  // strictly inside (0,1); never returns 0 or 1 exactly
  double uniform01(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(std::uint64_t counter, double a, double b) const {
    return a + (b - a) * uniform01(counter);
  }

  // Box-Muller with the cosine branch; draw k consumes counters 2k, 2k+1
  double normal(std::uint64_t counter) const {
    const double u1 = uniform01(2 * counter);
    const double u2 = uniform01(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t key_;
};

// Convenience wrapper when draws are consumed in order. Each draw reserves
// two raw counters so uniform and normal draws never overlap.
class Sequence {
 public:
  explicit Sequence(std::uint64_t seed, std::uint64_t stream_id = 0)
      : stream_(seed, stream_id) {}

  double next_uniform01() { return stream_.uniform01(2 * n_++); }
  double next_uniform(double a, double b) { return stream_.uniform(2 * n_++, a, b); }
  double next_normal() { return stream_.normal(n_++); }
  std::uint64_t next_bits() { return stream_.bits(2 * n_++); }

 private:
  Stream stream_;
  std::uint64_t n_ = 0;
};

}  // namespace uclab::rng
