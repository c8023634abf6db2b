#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "scdm/channel.hpp"
#include "scdm/constellation.hpp"
#include "scdm/csv.hpp"
#include "scdm/errors.hpp"
#include "scdm/rng.hpp"
#include "scdm/score_field.hpp"

namespace scdm {

// Reverse-time sampler settings. Defaults: L = 2 Langevin steps per level,
// step-length controller r = 0.16, 64-level schedule on [0.01, 10].
struct SamplerConfig {
  int L = 2;
  double r = 0.16;
  NoiseSchedule schedule{0.01, 10.0, 64};
  bool denoise_final = true;

  void validate() const {
    if (L < 0) throw ConfigError("Langevin steps L must be >= 0");
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("step-length controller r must lie in (0, 1)");
  }
};

// The update rules below are written with the conjugate (Wirtinger) score
// g = s / 2, for which the CN(0, I) noise of the channel model enters with
// unit coefficient:
//   predictor  z <- z + (sigma_next^2 - sigma_cur^2) g + sqrt(sigma_next^2 - sigma_cur^2) eps
//   corrector  z <- z + xi g + sqrt(2 xi) eps,   xi = 2 (r |eps'| / |g|)^2
// Per real dimension this is the reverse VE diffusion and Langevin dynamics
// driven by the real-gradient score s.

template <ScoreField Field>
SymbolSequence predictor_step(std::span<const cplx> z_next, const Field& field, double sigma_next,
                              double sigma_cur, Rng& rng) {
  if (!(sigma_next > sigma_cur) || sigma_cur < 0.0)
    throw std::invalid_argument("predictor needs sigma_next > sigma_cur >= 0");
  const double dvar = sigma_next * sigma_next - sigma_cur * sigma_cur;
  const double noise = std::sqrt(dvar);
  SymbolSequence s(z_next.size());
  field.score(z_next, sigma_next, s);
  SymbolSequence out(z_next.begin(), z_next.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += dvar * 0.5 * s[k] + noise * rng.complex_normal();
  return out;
}

template <ScoreField Field>
SymbolSequence corrector_step(std::span<const cplx> z, const Field& field, double sigma, double r, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("corrector needs sigma > 0");
  SymbolSequence eps(z.size());
  for (cplx& e : eps) e = rng.complex_normal();
  SymbolSequence g(z.size());
  field.score(z, sigma, g);
  for (cplx& v : g) v *= 0.5;
  const double g_norm = std::sqrt(squared_norm(g));
  SymbolSequence out(z.begin(), z.end());
  if (g_norm == 0.0) return out;  // degenerate score: step length undefined, skip
  const double ratio = r * std::sqrt(squared_norm(eps)) / g_norm;
  const double xi = 2.0 * ratio * ratio;
  const double noise = std::sqrt(2.0 * xi);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += xi * g[k] + noise * rng.complex_normal();
  return out;
}

struct DenoiseTraceRow {
  int step;
  double sigma;
  double mse_vs_z0;
};

// Optional per-level record of the reverse trajectory against a known z_0.
struct DenoiseTrace {
  std::vector<cplx> reference;
  std::vector<DenoiseTraceRow> rows;

  void record(int step, double sigma, std::span<const cplx> z) {
    if (reference.size() != z.size()) return;
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) acc += std::norm(z[k] - reference[k]);
    rows.push_back({step, sigma, z.empty() ? 0.0 : acc / static_cast<double>(z.size())});
  }
};

inline void write_trace_csv(std::ostream& os, const DenoiseTrace& trace) {
  os << "step,sigma,mse_vs_z0\n";
  for (const auto& row : trace.rows)
    os << row.step << ',' << fmt_real(row.sigma) << ',' << fmt_real(row.mse_vs_z0) << '\n';
}

// Predictor-corrector descent from schedule level n_snr (z is assumed to carry
// noise std sigma_{n_snr}) down to level 1, then either the noise-free Tweedie
// step z + (sigma_1^2 / 2) s(z, sigma_1) or a last predictor step to sigma_0 = 0.
template <ScoreField Field>
SymbolSequence pc_sample_from_step(std::span<const cplx> z_start, int n_snr, const Field& field,
                                   const SamplerConfig& cfg, Rng& rng, DenoiseTrace* trace = nullptr) {
  cfg.validate();
  const NoiseSchedule& sched = cfg.schedule;
  if (n_snr < 1 || n_snr > sched.levels()) throw std::out_of_range("start level outside the schedule");
  SymbolSequence z(z_start.begin(), z_start.end());
  if (trace) trace->record(n_snr, sched.sigma(n_snr), z);
  for (int i = n_snr - 1; i >= 1; --i) {
    z = predictor_step(z, field, sched.sigma(i + 1), sched.sigma(i), rng);
    for (int j = 0; j < cfg.L; ++j) z = corrector_step(z, field, sched.sigma(i), cfg.r, rng);
    if (trace) trace->record(i, sched.sigma(i), z);
  }
  const double s1 = sched.sigma(1);
  if (cfg.denoise_final) {
    SymbolSequence s(z.size());
    field.score(z, s1, s);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += 0.5 * s1 * s1 * s[k];
  } else {
    z = predictor_step(z, field, s1, 0.0, rng);
  }
  if (trace) trace->record(0, 0.0, z);
  return z;
}

// Full receiver-side denoiser: map the channel SNR onto the schedule, top up
// the noise to the grid level, then run the predictor-corrector descent.
template <ScoreField Field>
SymbolSequence pc_sample(std::span<const cplx> z_tilde, double snr_db, const Field& field,
                         const SamplerConfig& cfg, Rng& rng, DenoiseTrace* trace = nullptr) {
  const GridMatch match = snr_to_step(snr_db, cfg.schedule);
  const SymbolSequence z = match_to_grid(z_tilde, match.sigma_gap, rng);
  return pc_sample_from_step(z, match.step, field, cfg, rng, trace);
}

}  // namespace scdm
