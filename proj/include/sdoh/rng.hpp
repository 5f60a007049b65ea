#pragma once

#include <cstdint>
#include <vector>

namespace sdoh {

/// Deterministic 64-bit generator (splitmix64). The standard <random>
/// distributions are implementation-defined, so every sampling decision in
/// the toolkit goes through this class to keep corpora and checkpoints
/// reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [-r, r].
  double next_symmetric(double r) { return (2.0 * next_double() - 1.0) * r; }

  /// Index sampled proportionally to the given non-negative weights.
  std::size_t next_weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) return 0;
    double x = next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0) return i;
    }
    return weights.size() - 1;
  }

  /// Fisher-Yates shuffle of index order.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Derives an independent stream from a base seed and stream ids, so that
  /// per-document or per-sentence draws do not depend on processing order.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b = 0) {
    Rng r(seed ^ (a * 0xd1342543de82ef95ULL) ^ (b * 0xaf251af3b0f025b5ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace sdoh
