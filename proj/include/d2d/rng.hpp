#pragma once

#include <cmath>
#include <cstdint>

namespace d2d {

// Seeded splitmix64 stream with hand-rolled transforms so that traces and
// fading draws are byte-stable across standard libraries and platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  double normal(double mean, double stddev) {
    double u1 = 1.0 - uniform();  // avoid log(0)
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }

  // Pareto on [lo, hi] via inverse CDF of the truncated distribution.
  double pareto_truncated(double alpha, double lo, double hi) {
    double tail = 1.0 - std::pow(lo / hi, alpha);
    double u = uniform();
    return lo * std::pow(1.0 - u * tail, -1.0 / alpha);
  }

  // Stable seed derivation for per-entity substreams.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace d2d
