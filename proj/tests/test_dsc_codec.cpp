#include <gtest/gtest.h>

#include <numeric>

#include "scdm/scdm.hpp"

using namespace scdm;

namespace {

double decoder_mse_noiseless(const QuantizingEncoder& enc, const DecoderModel& dec, int sources, std::uint64_t seed) {
  Rng rng(seed);
  double acc = 0.0;
  for (int s = 0; s < sources; ++s) {
    const SourceVector x = draw_source(dec.dims(), rng);
    const SourceVector xh = decode(enc.encode(x), dec);
    for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - xh[k]) * (x[k] - xh[k]);
  }
  return acc / (static_cast<double>(sources) * dec.dims());
}

}  // namespace

TEST(Encoder, CellCentresLandOnConstellation) {
  for (int m : {4, 16, 64}) {
    const QuantizingEncoder enc(build_square_qam(m));
    const auto& scheme = enc.scheme();
    for (int a = 0; a < enc.levels(); ++a)
      for (int b = 0; b < enc.levels(); ++b) {
        const std::vector<double> x{enc.cell_center(a), enc.cell_center(b)};
        const cplx z = enc.encode(x)[0];
        const auto idx = demodulate_hard(SymbolSequence{z}, scheme)[0];
        EXPECT_EQ(z, scheme.points[static_cast<std::size_t>(idx)]);
      }
  }
}

TEST(Encoder, FourQamSignQuantization) {
  const QuantizingEncoder enc(build_square_qam(4));
  const double a = 1.0 / std::sqrt(2.0);
  const auto z = enc.encode(std::vector<double>{0.3, -0.2});
  ASSERT_EQ(z.size(), 1u);
  EXPECT_NEAR(z[0].real(), a, 1e-15);
  EXPECT_NEAR(z[0].imag(), -a, 1e-15);
}

TEST(Encoder, QuantizationErrorWithinHalfCell) {
  for (int m : {4, 16, 64}) {
    const QuantizingEncoder enc(build_square_qam(m));
    const double half = 0.5 * (2.0 / std::sqrt(static_cast<double>(m)));
    Rng rng(static_cast<std::uint64_t>(m));
    const SourceVector x = draw_source(1000, rng);
    const SourceVector q = enc.dequantize(x);
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_LE(std::abs(x[k] - q[k]), half + 1e-15);
    EXPECT_NEAR(enc.quantization_mse(), 4.0 / m / 12.0, 1e-15);
  }
}

TEST(Encoder, RejectsOddDimensionAndBpsk) {
  const QuantizingEncoder enc(build_square_qam(16));
  EXPECT_THROW(enc.encode(std::vector<double>{0.1, 0.2, 0.3}), std::invalid_argument);
  EXPECT_THROW(QuantizingEncoder{build_bpsk()}, std::invalid_argument);
}

TEST(Decoder, ZeroWeightsGiveZeroOutput) {
  Rng rng(1);
  auto dec = DecoderModel::create(4, 8, {16, 16}, rng);
  for (double& p : dec.net().params()) p = 0.0;
  const SymbolSequence z{{0.3, 0.1}, {-1, 2}, {0, 0}, {5, -5}};
  EXPECT_EQ(decode(z, dec), SourceVector(8, 0.0));
}

TEST(Decoder, DeterministicClampedAndShapeChecked) {
  Rng rng(2);
  const auto dec = DecoderModel::create(2, 4, {8}, rng);
  const SymbolSequence z{{30.0, -20.0}, {15.0, 40.0}};
  const auto a = decode(z, dec);
  EXPECT_EQ(a, decode(z, dec));
  for (double v : a) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(decode(SymbolSequence{{0, 0}}, dec), std::invalid_argument);
}

TEST(Decoder, BackpropMatchesFiniteDifferences) {
  Rng rng(3);
  auto dec = DecoderModel::create(3, 6, {10, 10}, rng);
  Rng data(4);
  const SourceVector x = draw_source(6, data);
  SymbolSequence z(3);
  for (cplx& v : z) v = data.complex_normal();
  auto loss_of = [&] {
    Mlp::Tape tape;
    const auto y = dec.raw_output(z, tape);
    double l = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) l += (y[k] - x[k]) * (y[k] - x[k]);
    return l;
  };
  Mlp::Tape tape;
  const auto y = dec.raw_output(z, tape);
  std::vector<double> g_out(y.size()), grad(dec.net().param_count(), 0.0);
  for (std::size_t k = 0; k < y.size(); ++k) g_out[k] = 2.0 * (y[k] - x[k]);
  dec.net().backward(tape, g_out, grad);
  auto params = dec.net().params();
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    const double up = loss_of();
    params[k] = saved - h;
    const double down = loss_of();
    params[k] = saved;
    const double fd = (up - down) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(grad[k]));
    if (scale < 1e-7) continue;
    EXPECT_LE(std::abs(fd - grad[k]) / scale, 1e-4) << "param " << k;
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(JointTrain, NoiselessReconstructionNearQuantizationFloor) {
  for (int m : {4, 16}) {
    const QuantizingEncoder enc(build_square_qam(m));
    Rng init(5);
    auto dec = DecoderModel::create(4, 8, {64, 64}, init);
    JointTrainConfig cfg;
    cfg.steps = 3000;
    cfg.batch_size = 32;
    cfg.adam.learning_rate = 2e-3;
    cfg.max_step = 1;
    cfg.seed = 6;
    const auto trained = joint_train(enc, std::move(dec), MixtureScoreOracle(enc.scheme()), SamplerConfig{}, cfg);
    const double got = decoder_mse_noiseless(enc, trained.decoder, 4000, 99);
    EXPECT_LE(got, 1.5 * enc.quantization_mse()) << "M=" << m;
  }
}

TEST(JointTrain, LossTrendAndDeterminism) {
  const QuantizingEncoder enc(build_square_qam(16));
  const MixtureScoreOracle oracle(enc.scheme());
  JointTrainConfig cfg;
  cfg.steps = 300;
  cfg.batch_size = 8;
  cfg.adam.learning_rate = 1e-3;
  cfg.seed = 7;
  auto make = [] {
    Rng init(8);
    return DecoderModel::create(4, 8, {32}, init);
  };
  const auto a = joint_train(enc, make(), oracle, SamplerConfig{}, cfg);
  const auto b = joint_train(enc, make(), oracle, SamplerConfig{}, cfg);
  ASSERT_EQ(a.trace.size(), 300u);
  const auto pa = a.decoder.net().params();
  EXPECT_TRUE(std::equal(pa.begin(), pa.end(), b.decoder.net().params().begin()));
  double head = 0.0, tail = 0.0;
  for (int k = 0; k < 50; ++k) {
    head += a.trace[static_cast<std::size_t>(k)].loss;
    tail += a.trace[a.trace.size() - 1 - static_cast<std::size_t>(k)].loss;
  }
  EXPECT_LT(tail, head);
  for (const auto& row : a.trace) {
    EXPECT_GE(row.snr_step, 1);
    EXPECT_LE(row.snr_step, 64);
  }

  cfg.input = DecoderInput::raw;
  const auto raw = joint_train(enc, make(), oracle, SamplerConfig{}, cfg);
  for (std::size_t k = 0; k < raw.trace.size(); ++k) EXPECT_EQ(raw.trace[k].snr_step, a.trace[k].snr_step);
}

TEST(JointTrain, RejectsBadConfig) {
  const QuantizingEncoder enc(build_square_qam(4));
  const MixtureScoreOracle oracle(enc.scheme());
  Rng init(9);
  JointTrainConfig cfg;
  cfg.max_step = 65;
  EXPECT_THROW(joint_train(enc, DecoderModel::create(2, 4, {4}, init), oracle, SamplerConfig{}, cfg), ConfigError);
  cfg.max_step = 0;
  EXPECT_THROW(joint_train(enc, DecoderModel::create(2, 6, {4}, init), oracle, SamplerConfig{}, cfg), ConfigError);
}

TEST(Pipeline, ShapesAgreeForEverySupportedCombination) {
  const SamplerConfig sampler;
  for (int m : {4, 16, 64})
    for (int d : {2, 8, 16}) {
      const QuantizingEncoder enc(build_square_qam(m));
      const MixtureScoreOracle oracle(enc.scheme());
      Rng rng(static_cast<std::uint64_t>(m * 100 + d));
      const auto dec = DecoderModel::create(d / 2, d, {8}, rng);
      const SourceVector x = draw_source(d, rng);
      const auto z = forward_diffuse(enc.encode(x), 20, sampler.schedule, rng);
      const auto zh = pc_sample_from_step(z, 20, oracle, sampler, rng);
      const auto xh = decode(zh, dec);
      EXPECT_EQ(xh.size(), static_cast<std::size_t>(d));
    }
}
