#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "scdm/constellation.hpp"
#include "scdm/csv.hpp"
#include "scdm/rng.hpp"

namespace scdm {

// Exact score, log-density and posterior mean of a uniform constellation prior
// observed through CN(0, sigma^2) noise:
//   p_sigma(z) = (1/M) sum_m exp(-|z - z_m|^2 / sigma^2) / (pi sigma^2).
// Symbols are i.i.d., so a sequence is handled symbol by symbol.
class MixtureScoreOracle {
 public:
  explicit MixtureScoreOracle(ConstellationScheme scheme) : scheme_(std::move(scheme)) {}

  const ConstellationScheme& scheme() const { return scheme_; }

  // Posterior component weights w_m(z), computed in log space.
  void weights(cplx z, double sigma, std::span<double> w) const {
    check_sigma(sigma);
    const double inv_var = 1.0 / (sigma * sigma);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < w.size(); ++m) {
      w[m] = -std::norm(z - scheme_.points[m]) * inv_var;
      top = std::max(top, w[m]);
    }
    double total = 0.0;
    for (double& v : w) {
      v = std::exp(v - top);
      total += v;
    }
    for (double& v : w) v /= total;
  }

  double log_density(cplx z, double sigma) const {
    check_sigma(sigma);
    const double inv_var = 1.0 / (sigma * sigma);
    double top = -std::numeric_limits<double>::infinity();
    for (const cplx& p : scheme_.points) top = std::max(top, -std::norm(z - p) * inv_var);
    double acc = 0.0;
    for (const cplx& p : scheme_.points) acc += std::exp(-std::norm(z - p) * inv_var - top);
    return top + std::log(acc / scheme_.order) - std::log(std::numbers::pi * sigma * sigma);
  }

  // (2 / sigma^2) * sum_m w_m (z_m - z)
  cplx mixture_score(cplx z, double sigma) const {
    std::vector<double> w(scheme_.points.size());
    weights(z, sigma, w);
    cplx acc{0.0, 0.0};
    for (std::size_t m = 0; m < w.size(); ++m) acc += w[m] * (scheme_.points[m] - z);
    return (2.0 / (sigma * sigma)) * acc;
  }

  // E[z_0 | z] = sum_m w_m z_m
  cplx posterior_mean(cplx z, double sigma) const {
    std::vector<double> w(scheme_.points.size());
    weights(z, sigma, w);
    cplx acc{0.0, 0.0};
    for (std::size_t m = 0; m < w.size(); ++m) acc += w[m] * scheme_.points[m];
    return acc;
  }

  void score(std::span<const cplx> z, double sigma, std::span<cplx> out) const {
    std::vector<double> w(scheme_.points.size());
    const double gain = 2.0 / (sigma * sigma);
    for (std::size_t k = 0; k < z.size(); ++k) {
      weights(z[k], sigma, w);
      cplx acc{0.0, 0.0};
      for (std::size_t m = 0; m < w.size(); ++m) acc += w[m] * (scheme_.points[m] - z[k]);
      out[k] = gain * acc;
    }
  }

 private:
  static void check_sigma(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("oracle needs sigma > 0");
  }

  ConstellationScheme scheme_;
};

// Monte-Carlo estimate of E|z_0 - E[z_0 | z_0 + sigma eps]|^2 per symbol.
inline double mmse_bound(double sigma, const ConstellationScheme& scheme, long trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("mmse_bound needs trials >= 1");
  const MixtureScoreOracle oracle(scheme);
  double acc = 0.0;
  for (long t = 0; t < trials; ++t) {
    const cplx z0 = scheme.points[static_cast<std::size_t>(rng.uniform_int(0, scheme.order - 1))];
    const cplx y = z0 + sigma * rng.complex_normal();
    acc += std::norm(z0 - oracle.posterior_mean(y, sigma));
  }
  return acc / static_cast<double>(trials);
}

// CSV: re,im,sigma,score_re,score_im over a square grid [-half_width, half_width]^2.
template <class Field>
void write_score_field_csv(std::ostream& os, const Field& field, std::span<const double> sigmas,
                           double half_width, int points_per_axis) {
  os << "re,im,sigma,score_re,score_im\n";
  std::vector<cplx> z(1), s(1);
  for (double sigma : sigmas) {
    for (int a = 0; a < points_per_axis; ++a) {
      for (int b = 0; b < points_per_axis; ++b) {
        const double step = 2.0 * half_width / (points_per_axis - 1);
        z[0] = {-half_width + a * step, -half_width + b * step};
        field.score(z, sigma, s);
        os << fmt_real(z[0].real()) << ',' << fmt_real(z[0].imag()) << ',' << fmt_real(sigma) << ','
           << fmt_real(s[0].real()) << ',' << fmt_real(s[0].imag()) << '\n';
      }
    }
  }
}

}  // namespace scdm
