#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace cle {

// Deterministic 64-bit generator (splitmix64). Used for every seeded draw in
// the library so that identical seeds give identical streams on any platform,
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool coin() { return (next_u64() & 1ull) != 0; }

  // k sorted draws from (lo, hi), strictly increasing (resamples collisions).
  std::vector<double> sorted_points(int k, double lo, double hi) {
    std::vector<double> xs(static_cast<std::size_t>(k));
    for (auto& x : xs) x = uniform(lo, hi);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) {
      while (xs[i] <= xs[i - 1]) xs[i] = std::nextafter(xs[i - 1], hi);
    }
    return xs;
  }

 private:
  std::uint64_t state_;
};

}  // namespace cle
