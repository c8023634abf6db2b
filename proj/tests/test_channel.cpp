#include <gtest/gtest.h>

#include "scdm/scdm.hpp"

using namespace scdm;

namespace {

struct Moments {
  cplx mean;
  double var_complex;
  double var_re;
};

Moments noise_moments(const SymbolSequence& out, cplx ref) {
  Moments m{0.0, 0.0, 0.0};
  for (const cplx& v : out) {
    m.mean += v;
    m.var_complex += std::norm(v - ref);
    m.var_re += (v.real() - ref.real()) * (v.real() - ref.real());
  }
  const double n = static_cast<double>(out.size());
  m.mean /= n;
  m.var_complex /= n;
  m.var_re /= n;
  return m;
}

}  // namespace

TEST(SnrToSigma, Values) {
  EXPECT_DOUBLE_EQ(snr_to_sigma(0.0), 1.0);
  EXPECT_NEAR(snr_to_sigma(-18.0) * snr_to_sigma(-18.0), std::pow(10.0, 1.8), 1e-9);
  EXPECT_NEAR(snr_to_sigma(-18.0), 7.9433, 1e-4);
  EXPECT_NEAR(snr_to_sigma(18.0), 0.12589, 1e-5);
  EXPECT_NEAR(snr_to_sigma(0.0, 4.0), 2.0, 1e-15);
}

TEST(Awgn, ZeroSigmaIsIdentity) {
  Rng rng(3);
  const SymbolSequence z{{0.3, -0.2}, {1, 0}};
  EXPECT_EQ(awgn_transmit(z, 0.0, rng), z);
}

TEST(Awgn, ComplexAndPerDimensionVariance) {
  Rng rng(11);
  const SymbolSequence z(100000, cplx(1.0, 0.0));
  const auto m = noise_moments(awgn_transmit(z, 1.0, rng), {1.0, 0.0});
  EXPECT_NEAR(m.var_complex, 1.0, 0.02);
  EXPECT_NEAR(m.var_re, 0.5, 0.01);
}

TEST(Schedule, GeometricGrid) {
  const NoiseSchedule s(0.01, 10.0, 64);
  EXPECT_DOUBLE_EQ(s.sigma(1), 0.01);
  EXPECT_NEAR(s.sigma(64), 10.0, 1e-12);
  EXPECT_EQ(s.sigma(0), 0.0);
  const double ratio = std::pow(1000.0, 1.0 / 63.0);
  EXPECT_NEAR(ratio, 1.1158, 1e-4);
  for (int i = 1; i < 64; ++i) EXPECT_NEAR(s.sigma(i + 1) / s.sigma(i), ratio, 1e-12);
  const NoiseSchedule two(1.0, 2.0, 2);
  EXPECT_DOUBLE_EQ(two.sigma(1), 1.0);
  EXPECT_DOUBLE_EQ(two.sigma(2), 2.0);
}

TEST(Schedule, RejectsBadParameters) {
  EXPECT_THROW(NoiseSchedule(0.0, 1.0, 4), ConfigError);
  EXPECT_THROW(NoiseSchedule(2.0, 1.0, 4), ConfigError);
  EXPECT_THROW(NoiseSchedule(0.1, 1.0, 1), ConfigError);
}

TEST(ForwardDiffuse, SmallestLevelStaysNearSymbol) {
  const NoiseSchedule s(0.01, 10.0, 64);
  Rng rng(5);
  const SymbolSequence z0(10000, cplx(1.0, 0.0));
  const auto z = forward_diffuse(z0, 1, s, rng);
  int outside = 0;
  for (const cplx& v : z) outside += std::abs(v.real() - 1.0) > 0.1 || std::abs(v.imag()) > 0.1;
  EXPECT_EQ(outside, 0);
}

TEST(ForwardDiffuse, MarginalVarianceAndDriftFreeMean) {
  const NoiseSchedule s(0.01, 10.0, 64);
  const cplx ref(-1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  for (int i : {1, 16, 32, 64}) {
    Rng rng = Rng::stream(9, static_cast<std::uint64_t>(i));
    const SymbolSequence z0(100000, ref);
    const auto m = noise_moments(forward_diffuse(z0, i, s, rng), ref);
    EXPECT_NEAR(m.var_complex / s.variance(i), 1.0, 0.02) << "level " << i;
    const double tol = 3.0 * s.sigma(i) / std::sqrt(1e5);
    EXPECT_NEAR(m.mean.real(), ref.real(), tol);
    EXPECT_NEAR(m.mean.imag(), ref.imag(), tol);
  }
}

TEST(ForwardDiffuse, IteratedChainHasSameMarginal) {
  const NoiseSchedule s(0.01, 10.0, 64);
  Rng rng(21);
  const SymbolSequence z0(50000, cplx(1.0, 0.0));
  const auto m = noise_moments(forward_diffuse_iterated(z0, 40, s, rng), {1.0, 0.0});
  EXPECT_NEAR(m.var_complex / s.variance(40), 1.0, 0.03);
}

TEST(ForwardDiffuse, SeededDeterminism) {
  const NoiseSchedule s(0.01, 10.0, 64);
  const SymbolSequence z0(64, cplx(0.5, 0.5));
  Rng a(77), b(77);
  EXPECT_EQ(forward_diffuse(z0, 30, s, a), forward_diffuse(z0, 30, s, b));
}

TEST(SnrToStep, OnGridMatch) {
  const NoiseSchedule s(0.01, 10.0, 64);
  for (int k : {1, 10, 40, 64}) {
    const double snr = -20.0 * std::log10(s.sigma(k));
    const GridMatch g = snr_to_step(snr, s);
    EXPECT_EQ(g.step, k);
    EXPECT_NEAR(g.sigma_gap, 0.0, 1e-6 * s.sigma(k));
  }
}

TEST(SnrToStep, BelowGridFloor) {
  const NoiseSchedule s(0.01, 10.0, 64);
  const GridMatch g = snr_to_step(60.0, s);
  EXPECT_EQ(g.step, 1);
  EXPECT_NEAR(g.sigma_gap, std::sqrt(1e-4 - 1e-6), 1e-12);
}

TEST(SnrToStep, ScansGeometricGrid) {
  const NoiseSchedule s(0.01, 10.0, 64);
  const double sigma_ch = snr_to_sigma(-18.0);
  const GridMatch g = snr_to_step(-18.0, s);
  EXPECT_LT(s.sigma(g.step - 1), sigma_ch);
  EXPECT_GE(s.sigma(g.step), sigma_ch);
  EXPECT_NEAR(g.sigma_gap * g.sigma_gap + sigma_ch * sigma_ch, s.variance(g.step), 1e-9);
  EXPECT_THROW(snr_to_step(-21.0, s), ConfigError);
}

TEST(MatchToGrid, ZeroGapIdentityAndVarianceDoubles) {
  Rng rng(4);
  const SymbolSequence z{{0.1, 0.2}, {-1, 0}};
  EXPECT_EQ(match_to_grid(z, 0.0, rng), z);

  const double sigma_ch = 0.7;
  const SymbolSequence z0(100000, cplx(0.0, 0.0));
  const auto rx = awgn_transmit(z0, sigma_ch, rng);
  const auto topped = match_to_grid(rx, sigma_ch, rng);
  const auto m = noise_moments(topped, {0.0, 0.0});
  EXPECT_NEAR(m.var_complex / (2.0 * sigma_ch * sigma_ch), 1.0, 0.02);
}

TEST(VpReference, SmallBetaFirstStepIsNearIdentity) {
  Rng rng(8);
  const SymbolSequence z0{{1.0, 0.0}, {0.0, -1.0}};
  const auto z = vp_forward_reference(z0, 1, 1e-10, rng);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(std::abs(z[k] - z0[k]), 0.0, 1e-4);
}

TEST(VpReference, MeanShrinksByClosedForm) {
  Rng rng(12);
  const SymbolSequence z0(100000, cplx(1.0, 0.0));
  const auto z = vp_forward_reference(z0, 64, 0.1, rng);
  cplx mean = 0.0;
  for (const cplx& v : z) mean += v;
  mean /= 1e5;
  const double expected = std::pow(0.9, 32.0);
  EXPECT_NEAR(mean.real(), expected, 0.01);

  const NoiseSchedule s(0.01, 10.0, 64);
  Rng rng2(12);
  const auto ve = forward_diffuse(z0, 64, s, rng2);
  cplx ve_mean = 0.0;
  for (const cplx& v : ve) ve_mean += v;
  ve_mean /= 1e5;
  EXPECT_NEAR(ve_mean.real(), 1.0, 3.0 * 10.0 / std::sqrt(1e5));
}
