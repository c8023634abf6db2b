#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace scdm {

// SplitMix64 finalizer; used to decorrelate derived stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. Every Monte-Carlo trial owns one, derived from
// (master_seed, stream ids...), so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  // Independent stream for (master_seed, a, b).
  static Rng stream(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(mix64(mix64(master_seed ^ mix64(a + 1)) ^ mix64(b + 0x632be59bd9b4e019ULL)));
  }

  double normal() { return normal_(engine_); }

  // CN(0, 1): independent real and imaginary parts of variance 1/2.
  std::complex<double> complex_normal() {
    constexpr double kHalf = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kHalf * re, kHalf * im};
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace scdm
