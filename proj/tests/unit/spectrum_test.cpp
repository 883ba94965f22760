#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include <mdrdf/spectrum.hpp>

using namespace mdrdf;

namespace {

// Mean of log S over (0, pi), with log S supplied directly so an endpoint
// zero of S stays an integrable singularity.
template <class F>
double quad_log_mean(F&& log_s) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(log_s, 0.0, std::numbers::pi) / std::numbers::pi;
}

}  // namespace

TEST(Spectrum, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(Spectrum({1.0, -0.1}), Error);
  EXPECT_THROW(Spectrum({1.0, NAN}), Error);
  EXPECT_THROW(Spectrum(std::vector<double>{}), Error);
}

TEST(Spectrum, MidpointGrid) {
  EXPECT_DOUBLE_EQ(Spectrum::omega(0, 4), std::numbers::pi / 8);
  EXPECT_DOUBLE_EQ(Spectrum::omega(3, 4), 7 * std::numbers::pi / 8);
  EXPECT_NEAR(cosine_spectrum(4096).variance(), 1.0, 1e-12);
}

TEST(Spectrum, LinearInterpolationFoldsAndClamps) {
  const Spectrum s = Spectrum::sample(4, [](double w) { return w; });
  EXPECT_DOUBLE_EQ(s.at(s.omega(1)), s[1]);
  EXPECT_NEAR(s.at(0.5 * (s.omega(1) + s.omega(2))), 0.5 * (s[1] + s[2]), 1e-15);
  EXPECT_NEAR(s.at(-s.omega(2)), s[2], 1e-15);
  EXPECT_DOUBLE_EQ(s.at(0.0), s[0]);
  EXPECT_DOUBLE_EQ(s.at(std::numbers::pi), s[3]);
}

TEST(EntropyPower, Flat) { EXPECT_NEAR(entropy_power(flat_spectrum(2.0, 64)), 2.0, 1e-14); }

TEST(EntropyPower, CosineAgainstQuadrature) {
  // log(1 + cos w) = log 2 + 2 log cos(w/2)
  const double oracle = std::exp(quad_log_mean([](double w) { return std::log(2.0) + 2.0 * std::log(std::cos(0.5 * w)); }));
  EXPECT_NEAR(oracle, 0.5, 1e-10);
  EXPECT_NEAR(entropy_power(cosine_spectrum(4096)), oracle, 1e-3);
  EXPECT_NEAR(entropy_power(cosine_spectrum(1 << 16)), oracle, 1e-4);
}

TEST(EntropyPower, Ar1IsInnovationVariance) {
  const double oracle = std::exp(quad_log_mean([](double w) { return -std::log(std::norm(1.0 - 0.9 * std::polar(1.0, -w))); }));
  EXPECT_NEAR(oracle, 1.0, 1e-10);
  EXPECT_NEAR(entropy_power(ar_spectrum({0.9}, 1.0, 4096)), 1.0, 1e-9);
}

TEST(EntropyPower, ZeroSpectrumThrows) {
  try {
    entropy_power(Spectrum({1.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveSpectrum);
  }
}

TEST(Autocorrelation, Examples) {
  auto r = autocorrelation(flat_spectrum(1.0, 64), 2);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 0.0, 1e-14);
  EXPECT_NEAR(r[2], 0.0, 1e-14);

  r = autocorrelation(cosine_spectrum(4096), 1);
  EXPECT_NEAR(r[0], 1.0, 1e-12);
  EXPECT_NEAR(r[1], 0.5, 1e-12);

  r = autocorrelation(ar_spectrum({0.9}, 1.0, 4096), 3);
  for (int m = 0; m <= 3; ++m) EXPECT_NEAR(r[m], std::pow(0.9, m) / (1.0 - 0.81), 1e-9) << m;
}

TEST(Autocorrelation, LagTooLarge) {
  try {
    autocorrelation(flat_spectrum(1.0, 8), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LagTooLarge);
  }
}

TEST(Predictor, Ar1Recovered) {
  const auto p = optimal_predictor(ar_spectrum({0.9}, 1.0, 4096), 8);
  EXPECT_NEAR(p.coeffs[0], 0.9, 1e-3);
  for (int k = 1; k < 8; ++k) EXPECT_NEAR(p.coeffs[k], 0.0, 1e-3);
  EXPECT_NEAR(p.innovation_variance, 1.0, 1e-3);
}

TEST(Predictor, Ar2Recovered) {
  const auto p = optimal_predictor(ar_spectrum({1.2, -0.5}, 0.3, 4096), 4);
  EXPECT_NEAR(p.coeffs[0], 1.2, 1e-6);
  EXPECT_NEAR(p.coeffs[1], -0.5, 1e-6);
  EXPECT_NEAR(p.innovation_variance, 0.3, 1e-6);
}

TEST(Predictor, FlatIsUnpredictable) {
  const auto p = optimal_predictor(flat_spectrum(3.0, 256), 6);
  for (double a : p.coeffs) EXPECT_NEAR(a, 0.0, 1e-12);
  EXPECT_NEAR(p.innovation_variance, 3.0, 1e-12);
}

TEST(Predictor, CosineConvergesSlowly) {
  const auto p = optimal_predictor(cosine_spectrum(4096), 32);
  EXPECT_NEAR(p.innovation_variance, 0.5, 0.025);
  EXPECT_GT(p.innovation_variance, 0.5);
}

TEST(Predictor, LevinsonRejectsSingular) {
  const std::vector<double> r{1.0, 1.0, 1.0};
  try {
    levinson(r, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularToeplitz);
  }
}

TEST(Predictor, SpectrumFromPredictor) {
  EXPECT_NEAR(ar_spectrum({}, 1.0, 16).max(), 1.0, 1e-15);
  EXPECT_NEAR(ar_spectrum({}, 1.0, 16).min(), 1.0, 1e-15);
  PredictorCoeffs c{{0.9}, 1.0, {}};
  EXPECT_NEAR(1.0 / predictor_error_gain(c.coeffs, 0.0), 100.0, 1e-9);
  // 0.5 / |1 + e^{-jw}|^2 = 1 / (4 (1 + cos w)): reciprocal of 4x the cosine spectrum.
  const Spectrum s = ar_spectrum({-1.0}, 0.5, 64);
  const Spectrum c1 = cosine_spectrum(64);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(s[k] * 4.0 * c1[k], 1.0, 1e-12);
}

TEST(Predictor, MinimumPhaseCheck) {
  EXPECT_TRUE(is_minimum_phase(std::vector<double>{0.9}));
  EXPECT_TRUE(is_minimum_phase(std::vector<double>{1.2, -0.5}));
  EXPECT_FALSE(is_minimum_phase(std::vector<double>{1.0}));
  EXPECT_FALSE(is_minimum_phase(std::vector<double>{2.5, -1.0}));
  EXPECT_TRUE(is_minimum_phase(std::vector<double>{}));
}

TEST(Regularize, Examples) {
  const Spectrum s = ar_spectrum({0.5}, 1.0, 128);
  const auto r = regularize(s, 0.5 * s.min());
  EXPECT_EQ(r.distortion_offset, 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(r.spectrum[k], s[k]);

  // Zero band of measure pi/2 out of the 2 pi period: a quarter of the grid.
  const Spectrum z = Spectrum::sample(400, [](double w) { return w < 0.75 * std::numbers::pi ? 1.0 : 0.0; });
  EXPECT_NEAR(regularize(z, 0.01).distortion_offset, 0.0025, 1e-15);

  EXPECT_LT(regularize(cosine_spectrum(4096), 1e-6).distortion_offset, 1e-6);
  EXPECT_THROW(regularize(s, 0.0), Error);
}
