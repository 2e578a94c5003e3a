#pragma once

#include <cstdint>
#include <random>

namespace weakfactor {

/// Counter-based stream splitting: a stream is addressed by up to three
/// 64-bit coordinates on top of a base seed (grid point, replication,
/// module), hashed through splitmix64 into an mt19937_64 seed. Distinct
/// coordinates give statistically independent streams, so parallel
/// replications reproduce bit-identically regardless of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t a = 0,
                     std::uint64_t b = 0, std::uint64_t c = 0)
      : engine_(derive_seed(seed, a, b, c)) {}

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a = 0,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix(seed);
    s = splitmix(s + a);
    s = splitmix(s + b);
    s = splitmix(s + c);
    return s;
  }

  double gaussian() { return normal_(engine_); }

  /// Uniform on [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Module tags for sub-stream derivation inside one replication.
enum class StreamTag : std::uint64_t {
  kLoadings = 1,
  kFactors = 2,
  kNoise = 3,
  kDiagnostics = 4,
};

}  // namespace weakfactor
