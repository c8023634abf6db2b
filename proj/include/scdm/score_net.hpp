#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdm/channel.hpp"
#include "scdm/constellation.hpp"
#include "scdm/errors.hpp"
#include "scdm/mlp.hpp"
#include "scdm/rng.hpp"
#include "scdm/score_field.hpp"

namespace scdm {

// Per-dimension variance of a unit-power symbol prior.
inline constexpr double kDataVariance = 0.5;

// Output head of the score network. The MLP emits F(re, im, log sigma); the
// denoised estimate is D = c_skip z + c_out F and the score (2/sigma^2)(D - z).
// c_out -> 1 and c_skip -> 0 as sigma -> 0, so F is bounded there; for large
// sigma F -> 0 reproduces the Gaussian-prior score of a unit-power source.
struct HeadCoefficients {
  double c_skip;
  double c_out;
  double gain;  // 2 / sigma^2
};

inline HeadCoefficients head_coefficients(double sigma) {
  const double v = 0.5 * sigma * sigma;
  const double c_out = kDataVariance / (kDataVariance + v);
  return {c_out * (1.0 - c_out), c_out, 2.0 / (sigma * sigma)};
}

class MlpScoreModel {
 public:
  MlpScoreModel() = default;
  explicit MlpScoreModel(Mlp net) : net_(std::move(net)) {
    if (net_.input_size() != 3 || net_.output_size() != 2)
      throw std::invalid_argument("score network must map 3 inputs to 2 outputs");
  }

  static MlpScoreModel create(const std::vector<int>& hidden, Rng& rng) {
    std::vector<int> sizes{3};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2);
    Mlp net(sizes);
    net.init_glorot(rng);
    return MlpScoreModel(std::move(net));
  }

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

  // Raw network output F for one symbol.
  cplx network_output(cplx z, double sigma, Mlp::Tape& tape) const {
    const double in[3] = {z.real(), z.imag(), std::log(sigma)};
    net_.forward(in, tape);
    const auto& out = tape.act.back();
    return {out[0], out[1]};
  }

  cplx forward(cplx z, double sigma) const {
    if (!(sigma > 0.0)) throw std::invalid_argument("score model needs sigma > 0");
    Mlp::Tape tape;
    return score_from_output(z, sigma, network_output(z, sigma, tape));
  }

  static cplx score_from_output(cplx z, double sigma, cplx f) {
    const HeadCoefficients h = head_coefficients(sigma);
    return h.gain * (h.c_skip * z + h.c_out * f - z);
  }

  void score(std::span<const cplx> z, double sigma, std::span<cplx> out) const {
    Mlp::Tape tape;
    for (std::size_t k = 0; k < z.size(); ++k)
      out[k] = score_from_output(z[k], sigma, network_output(z[k], sigma, tape));
  }

 private:
  Mlp net_;
};

struct DsmConfig {
  NoiseSchedule schedule{0.01, 10.0, 64};
  std::vector<int> hidden{64, 64};
  int batch_size = 256;
  long steps = 20000;
  AdamConfig adam{};
  std::uint64_t seed = 0;
};

// lambda(sigma) = sigma^2 / 2: makes the weighted target unit-variance per real dimension.
inline double dsm_weight(double sigma) { return 0.5 * sigma * sigma; }

// grad_{z_i} log p(z_i | z_0) for z_i = z_0 + sigma * CN(0, 1).
inline cplx dsm_target(cplx z_i, cplx z_0, double sigma) { return -(z_i - z_0) / dsm_weight(sigma); }

inline double dsm_sample_loss(cplx score, cplx target, double sigma) {
  return dsm_weight(sigma) * std::norm(score - target);
}

// One DSM minibatch: clean symbols, uniformly drawn levels, and the CN(0,1) noise.
struct DsmBatch {
  std::vector<cplx> z0;
  std::vector<int> level;
  std::vector<cplx> noise;

  std::size_t size() const { return z0.size(); }
  cplx noisy(std::size_t k, const NoiseSchedule& sched) const {
    return z0[k] + sched.sigma(level[k]) * noise[k];
  }
};

inline DsmBatch draw_dsm_batch(const ConstellationScheme& scheme, const NoiseSchedule& sched,
                               int batch_size, Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("DSM batch must be non-empty");
  DsmBatch b;
  b.z0.reserve(static_cast<std::size_t>(batch_size));
  for (int k = 0; k < batch_size; ++k) {
    b.z0.push_back(scheme.points[static_cast<std::size_t>(rng.uniform_int(0, scheme.order - 1))]);
    b.level.push_back(rng.uniform_int(1, sched.levels()));
    b.noise.push_back(rng.complex_normal());
  }
  return b;
}

// Mean weighted DSM loss of any score field on a fixed batch.
template <ScoreField Field>
double dsm_loss_value(const Field& field, const DsmBatch& batch, const NoiseSchedule& sched) {
  if (batch.size() == 0) throw std::invalid_argument("DSM batch must be non-empty");
  double acc = 0.0;
  std::vector<cplx> z(1), s(1);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double sigma = sched.sigma(batch.level[k]);
    z[0] = batch.noisy(k, sched);
    field.score(z, sigma, s);
    acc += dsm_sample_loss(s[0], dsm_target(z[0], batch.z0[k], sigma), sigma);
  }
  return acc / static_cast<double>(batch.size());
}

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean DSM loss and its exact parameter gradient by backpropagation.
inline LossAndGrad dsm_loss(const MlpScoreModel& model, const DsmBatch& batch, const NoiseSchedule& sched) {
  if (batch.size() == 0) throw std::invalid_argument("DSM batch must be non-empty");
  LossAndGrad out;
  out.grad.assign(model.net().param_count(), 0.0);
  Mlp::Tape tape;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double sigma = sched.sigma(batch.level[k]);
    const cplx zi = batch.noisy(k, sched);
    const cplx f = model.network_output(zi, sigma, tape);
    const cplx s = MlpScoreModel::score_from_output(zi, sigma, f);
    const cplx r = s - dsm_target(zi, batch.z0[k], sigma);
    const double lam = dsm_weight(sigma);
    out.loss += lam * std::norm(r) * inv_b;
    // d/dF of lam |s - t|^2 with ds/dF = gain * c_out
    const HeadCoefficients h = head_coefficients(sigma);
    const double chain = 2.0 * lam * h.gain * h.c_out * inv_b;
    const double g_out[2] = {chain * r.real(), chain * r.imag()};
    model.net().backward(tape, g_out, out.grad);
  }
  return out;
}

struct ScoreTraining {
  MlpScoreModel model;
  std::vector<double> loss_trace;  // one entry per step
};

// Denoising score matching on uniformly drawn constellation symbols with a
// uniformly drawn schedule level per sample; fixed step budget.
inline ScoreTraining train_score(const ConstellationScheme& scheme, const DsmConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  Rng init_rng = Rng::stream(cfg.seed, 0);
  Rng data_rng = Rng::stream(cfg.seed, 1);
  ScoreTraining result{MlpScoreModel::create(cfg.hidden, init_rng), {}};
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.steps));
  AdamState adam;
  for (long step = 0; step < cfg.steps; ++step) {
    const DsmBatch batch = draw_dsm_batch(scheme, cfg.schedule, cfg.batch_size, data_rng);
    const LossAndGrad lg = dsm_loss(result.model, batch, cfg.schedule);
    if (!std::isfinite(lg.loss))
      throw NumericalDivergence("score training diverged at step " + std::to_string(step) +
                                " (loss " + std::to_string(lg.loss) + ")");
    adam_step(result.model.net().params(), lg.grad, adam, cfg.adam);
    if (!result.model.net().all_finite())
      throw NumericalDivergence("score network parameters became non-finite at step " + std::to_string(step));
    result.loss_trace.push_back(lg.loss);
  }
  return result;
}

struct FieldComparison {
  double pooled = 0.0;             // sqrt(sum |a-b|^2 / sum |b|^2) over every grid point and sigma
  std::vector<double> per_sigma;   // same ratio restricted to each sigma
};

// Relative L2 distance of `field` from `reference` on the uniform grid
// [-half_width, half_width]^2 (points_per_axis per axis) at each sigma.
template <ScoreField Field, ScoreField Reference>
FieldComparison relative_l2(const Field& field, const Reference& reference, std::span<const double> sigmas,
                            double half_width = 3.0, int points_per_axis = 25) {
  std::vector<cplx> grid;
  const double step = 2.0 * half_width / (points_per_axis - 1);
  for (int a = 0; a < points_per_axis; ++a)
    for (int b = 0; b < points_per_axis; ++b) grid.emplace_back(-half_width + a * step, -half_width + b * step);
  std::vector<cplx> got(grid.size()), want(grid.size());
  FieldComparison cmp;
  double num_all = 0.0, den_all = 0.0;
  for (double sigma : sigmas) {
    field.score(grid, sigma, got);
    reference.score(grid, sigma, want);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      num += std::norm(got[k] - want[k]);
      den += std::norm(want[k]);
    }
    cmp.per_sigma.push_back(std::sqrt(num / den));
    num_all += num;
    den_all += den;
  }
  cmp.pooled = std::sqrt(num_all / den_all);
  return cmp;
}

}  // namespace scdm
