#pragma once

#include "dirtrace/common.hpp"

#include <cstdint>
#include <string_view>

namespace dirtrace {

// Counter-based generator (splitmix64 over a keyed counter). Stateless:
// uniform(i) depends only on (key, i), so parallel workers can consume
// disjoint index ranges and reductions stay bit-reproducible no matter how
// work is scheduled. All randomness in the toolkit flows from one user seed;
// per-job streams are derived by hashing a job-id string into the key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng from_seed(std::uint64_t seed, std::string_view job_id) {
    // FNV-1a over the job id, folded with the seed through one mix round.
    std::uint64_t h = 1469598103934665603ull;
    for (char c : job_id) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return CounterRng(mix(h ^ mix(seed)));
  }

  std::uint64_t bits(std::uint64_t i) const {
    return mix(key_ + (i + 1) * 0x9E3779B97F4A7C15ull);
  }

  // Uniform in [0,1), 53-bit mantissa, platform-independent.
  double uniform(std::uint64_t i) const {
    return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t i, double a, double b) const {
    return a + (b - a) * uniform(i);
  }

  // Uniform point in an axis box; consumes dim counters starting at i*dim.
  Point point_in_box(std::uint64_t i, const Point& lo, const Point& hi) const {
    Point p(lo.size());
    for (int k = 0; k < lo.size(); ++k)
      p[k] = uniform(i * static_cast<std::uint64_t>(lo.size()) + k, lo[k], hi[k]);
    return p;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
};

}  // namespace dirtrace
