#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdm/constellation.hpp"
#include "scdm/errors.hpp"
#include "scdm/rng.hpp"

namespace scdm {

// Geometric noise grid sigma_1 < ... < sigma_N, with the convention sigma_0 = 0.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  NoiseSchedule(double sigma_min, double sigma_max, int levels)
      : sigma_min_(sigma_min), sigma_max_(sigma_max) {
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
      throw ConfigError("schedule needs 0 < sigma_min < sigma_max");
    if (levels < 2) throw ConfigError("schedule needs at least 2 levels");
    sigmas_.resize(static_cast<std::size_t>(levels));
    const double ratio = sigma_max / sigma_min;
    for (int i = 0; i < levels; ++i)
      sigmas_[static_cast<std::size_t>(i)] =
          sigma_min * std::pow(ratio, static_cast<double>(i) / (levels - 1));
    sigmas_.front() = sigma_min;
    sigmas_.back() = sigma_max;
  }

  int levels() const { return static_cast<int>(sigmas_.size()); }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

  // 1-based level; sigma(0) == 0.
  double sigma(int i) const {
    if (i == 0) return 0.0;
    if (i < 0 || i > levels()) throw std::out_of_range("schedule level " + std::to_string(i));
    return sigmas_[static_cast<std::size_t>(i - 1)];
  }
  // Cumulative noise variance of level i.
  double variance(int i) const { return sigma(i) * sigma(i); }

  std::span<const double> sigmas() const { return sigmas_; }

 private:
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
  std::vector<double> sigmas_;
};

inline NoiseSchedule build_schedule(double sigma_min, double sigma_max, int levels) {
  return NoiseSchedule(sigma_min, sigma_max, levels);
}

// SNR = 10 log10(P / sigma^2), sigma^2 the total complex noise variance.
inline double snr_to_sigma(double snr_db, double power = 1.0) {
  if (!(power > 0.0)) throw ConfigError("signal power must be positive");
  return std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
}

struct ChannelConfig {
  double snr_db = 0.0;
  double power = 1.0;
  double sigma_ch() const { return snr_to_sigma(snr_db, power); }
};

// z + sigma * eps with eps ~ CN(0, I).
inline SymbolSequence awgn_transmit(std::span<const cplx> z, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise std must be non-negative");
  SymbolSequence out(z.begin(), z.end());
  for (cplx& v : out) v += sigma * rng.complex_normal();
  return out;
}

// Closed-form drift-free forward corruption z_0 + sigma_i * eps.
inline SymbolSequence forward_diffuse(std::span<const cplx> z0, int step, const NoiseSchedule& sched,
                                      Rng& rng) {
  if (step < 1 || step > sched.levels())
    throw std::out_of_range("diffusion step " + std::to_string(step) + " outside [1, " +
                            std::to_string(sched.levels()) + "]");
  return awgn_transmit(z0, sched.sigma(step), rng);
}

// Iterated form z_i = z_{i-1} + sqrt(sigma_i^2 - sigma_{i-1}^2) * eps.
inline SymbolSequence forward_diffuse_iterated(std::span<const cplx> z0, int step,
                                               const NoiseSchedule& sched, Rng& rng) {
  if (step < 1 || step > sched.levels())
    throw std::out_of_range("diffusion step " + std::to_string(step) + " out of range");
  SymbolSequence z(z0.begin(), z0.end());
  for (int i = 1; i <= step; ++i) {
    const double inc = std::sqrt(sched.variance(i) - sched.variance(i - 1));
    for (cplx& v : z) v += inc * rng.complex_normal();
  }
  return z;
}

struct GridMatch {
  int step = 0;            // N_snr
  double sigma_gap = 0.0;  // sqrt(sigma_{N_snr}^2 - sigma_ch^2)
};

// Smallest schedule level whose noise std covers the channel noise.
inline GridMatch snr_to_step(double snr_db, const NoiseSchedule& sched) {
  const double sigma_ch = snr_to_sigma(snr_db, 1.0);
  if (sigma_ch > sched.sigma_max() * (1.0 + 1e-12))
    throw ConfigError("SNR " + std::to_string(snr_db) + " dB needs sigma " +
                      std::to_string(sigma_ch) + " above schedule sigma_max " +
                      std::to_string(sched.sigma_max()));
  for (int i = 1; i <= sched.levels(); ++i) {
    const double s = sched.sigma(i);
    if (s >= sigma_ch * (1.0 - 1e-12)) return {i, std::sqrt(std::max(0.0, s * s - sigma_ch * sigma_ch))};
  }
  return {sched.levels(), 0.0};
}

// Adds the noise deficit so the received sequence sits exactly on a grid level.
inline SymbolSequence match_to_grid(std::span<const cplx> z_tilde, double sigma_gap, Rng& rng) {
  if (sigma_gap < 0.0) throw std::invalid_argument("sigma_gap must be non-negative");
  if (sigma_gap == 0.0) return SymbolSequence(z_tilde.begin(), z_tilde.end());
  return awgn_transmit(z_tilde, sigma_gap, rng);
}

// Drifted (variance-preserving) forward chain z_i = sqrt(1-beta) z_{i-1} + sqrt(beta) eps,
// kept only as the shrinking-mean contrast to the drift-free process.
inline SymbolSequence vp_forward_reference(std::span<const cplx> z0, int step, double beta, Rng& rng) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (step < 1) throw std::out_of_range("vp step must be >= 1");
  const double keep = std::sqrt(1.0 - beta);
  const double inject = std::sqrt(beta);
  SymbolSequence z(z0.begin(), z0.end());
  for (int i = 0; i < step; ++i)
    for (cplx& v : z) v = keep * v + inject * rng.complex_normal();
  return z;
}

}  // namespace scdm
