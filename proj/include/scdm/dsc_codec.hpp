#pragma once

#include <algorithm>
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
#include "scdm/pc_sampler.hpp"
#include "scdm/rng.hpp"
#include "scdm/score_field.hpp"

namespace scdm {

// Synthetic source message, every entry in [-1, 1].
using SourceVector = std::vector<double>;

inline SourceVector draw_source(int dims, Rng& rng) {
  SourceVector x(static_cast<std::size_t>(dims));
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

// Fixed uniform quantizer: each source entry picks one of k = sqrt(M) equal
// cells of [-1, 1], cell j maps to the j-th ascending PAM amplitude. Entries
// 2t and 2t+1 form the I and Q parts of symbol t.
class QuantizingEncoder {
 public:
  explicit QuantizingEncoder(ConstellationScheme scheme) : scheme_(std::move(scheme)) {
    if (!scheme_.is_square_qam())
      throw std::invalid_argument("quantizing encoder needs a square QAM scheme (two dims per symbol)");
  }

  const ConstellationScheme& scheme() const { return scheme_; }
  int levels() const { return scheme_.levels_per_axis(); }
  // Width of one quantizer cell in source units.
  double cell_width() const { return 2.0 / levels(); }

  int cell(double x) const {
    const int j = static_cast<int>(std::floor((x + 1.0) / cell_width()));
    return std::clamp(j, 0, levels() - 1);
  }
  double cell_center(int j) const { return -1.0 + (j + 0.5) * cell_width(); }

  SymbolSequence encode(std::span<const double> x) const {
    if (x.size() % 2 != 0) throw std::invalid_argument("source dimension must be even");
    SymbolSequence z(x.size() / 2);
    for (std::size_t t = 0; t < z.size(); ++t)
      z[t] = {scheme_.axis_levels[static_cast<std::size_t>(cell(x[2 * t]))],
              scheme_.axis_levels[static_cast<std::size_t>(cell(x[2 * t + 1]))]};
    return z;
  }

  // Cell centres of the quantized source (the best fixed reconstruction).
  SourceVector dequantize(std::span<const double> x) const {
    SourceVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = cell_center(cell(x[k]));
    return out;
  }

  // Per-dimension MSE of cell-centre reconstruction for a uniform source.
  double quantization_mse() const { return cell_width() * cell_width() / 12.0; }

 private:
  ConstellationScheme scheme_;
};

inline SymbolSequence encode(std::span<const double> x, const QuantizingEncoder& enc) { return enc.encode(x); }

// MLP from the 2n-real view of the received symbols to d source estimates.
class DecoderModel {
 public:
  DecoderModel() = default;
  explicit DecoderModel(Mlp net) : net_(std::move(net)) {}

  static DecoderModel create(int symbols, int dims, const std::vector<int>& hidden, Rng& rng) {
    std::vector<int> sizes{2 * symbols};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(dims);
    Mlp net(sizes);
    net.init_glorot(rng);
    return DecoderModel(std::move(net));
  }

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  int symbols() const { return net_.input_size() / 2; }
  int dims() const { return net_.output_size(); }

  // Unclamped network output (used for training).
  std::vector<double> raw_output(std::span<const cplx> z, Mlp::Tape& tape) const {
    check(z);
    net_.forward(as_reals(z), tape);
    return tape.act.back();
  }

 private:
  void check(std::span<const cplx> z) const {
    if (static_cast<int>(z.size()) != symbols())
      throw std::invalid_argument("decoder expects " + std::to_string(symbols()) + " symbols, got " +
                                  std::to_string(z.size()));
  }
  Mlp net_;
};

// Decoder forward pass with the output clamped to [-1, 1].
inline SourceVector decode(std::span<const cplx> z_hat, const DecoderModel& dec) {
  Mlp::Tape tape;
  SourceVector x = dec.raw_output(z_hat, tape);
  for (double& v : x) v = std::clamp(v, -1.0, 1.0);
  return x;
}

enum class DecoderInput { denoised, raw };

struct JointTrainConfig {
  long steps = 2000;
  int batch_size = 32;
  AdamConfig adam{};
  int max_step = 0;  // N_snr ~ Uniform{1..max_step}; 0 means the whole schedule
  DecoderInput input = DecoderInput::denoised;
  std::uint64_t seed = 0;
};

struct JointTrainRow {
  long step;
  double loss;
  int snr_step;  // N_snr of the first sample in the batch
};

struct JointTraining {
  DecoderModel decoder;
  std::vector<JointTrainRow> trace;
};

// Decoder retraining on SCDM output with the score model frozen: per sample
// x ~ U[-1,1]^d, N_snr ~ Uniform{1..N}, z_{N_snr} = z_0 + sigma_{N_snr} eps,
// z_hat = PC descent from N_snr, loss |x - D(z_hat)|^2 (mean per dimension).
// With input = raw the decoder sees z_{N_snr} itself; source and channel draws
// are identical in both modes for a given seed.
template <ScoreField Field>
JointTraining joint_train(const QuantizingEncoder& enc, DecoderModel dec, const Field& field,
                          const SamplerConfig& sampler, const JointTrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const NoiseSchedule& sched = sampler.schedule;
  const int top = cfg.max_step == 0 ? sched.levels() : cfg.max_step;
  if (top < 1 || top > sched.levels()) throw ConfigError("max_step outside the schedule");
  const int dims = dec.dims();
  if (dims != 2 * dec.symbols()) throw ConfigError("decoder must map n symbols to d = 2n dims");

  JointTraining result{std::move(dec), {}};
  AdamState adam;
  Mlp::Tape tape;
  std::vector<double> grad(result.decoder.net().param_count());
  const double scale = 2.0 / (static_cast<double>(cfg.batch_size) * dims);
  for (long step = 0; step < cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    int first_level = 0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto sample_id = static_cast<std::uint64_t>(step) * static_cast<std::uint64_t>(cfg.batch_size) +
                             static_cast<std::uint64_t>(b);
      Rng data = Rng::stream(cfg.seed, 2 * sample_id);
      Rng sampler_rng = Rng::stream(cfg.seed, 2 * sample_id + 1);
      const SourceVector x = draw_source(dims, data);
      const int level = data.uniform_int(1, top);
      if (b == 0) first_level = level;
      const SymbolSequence z0 = enc.encode(x);
      const SymbolSequence zn = forward_diffuse(z0, level, sched, data);
      const SymbolSequence input =
          cfg.input == DecoderInput::denoised ? pc_sample_from_step(zn, level, field, sampler, sampler_rng) : zn;
      const std::vector<double> y = result.decoder.raw_output(input, tape);
      std::vector<double> g_out(static_cast<std::size_t>(dims));
      for (int k = 0; k < dims; ++k) {
        const double r = y[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(k)];
        loss += r * r;
        g_out[static_cast<std::size_t>(k)] = scale * r;
      }
      result.decoder.net().backward(tape, g_out, grad);
    }
    loss /= static_cast<double>(cfg.batch_size) * dims;
    if (!std::isfinite(loss))
      throw NumericalDivergence("decoder training diverged at step " + std::to_string(step));
    adam_step(result.decoder.net().params(), grad, adam, cfg.adam);
    if (!result.decoder.net().all_finite())
      throw NumericalDivergence("decoder parameters became non-finite at step " + std::to_string(step));
    result.trace.push_back({step, loss, first_level});
  }
  return result;
}

}  // namespace scdm
