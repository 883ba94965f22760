#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "rdf.hpp"
#include "spectrum.hpp"

namespace mdrdf {

// Noise spectrum at twice the source rate on a 2N-point midpoint grid: the
// low half carries 2 theta+ compressed by two, the high half 2 theta- shifted
// by pi, so the high band at nu is 2 theta-(2 pi - 2 nu).
struct InterleavedSpectrum {
  Spectrum spectrum;

  double entropy_power() const { return mdrdf::entropy_power(spectrum); }
};

struct ShapingFilter {
  std::vector<double> coeffs;  // c_1..c_L' of C(z), strictly causal
  int predictor_order = 0;
  double innovation_variance = 0.0;  // order-L prediction error of the mask
  double entropy_power = 0.0;        // of the mask
  double tail_energy = 0.0;          // fraction of |1 + C|^2 energy dropped by truncation
  bool truncation_warning = false;

  std::size_t order() const noexcept { return coeffs.size(); }
};

struct PrePostFilters {
  Spectrum f;  // |F|
  Spectrum g;  // |G|
};

inline InterleavedSpectrum interleave_theta(const NoiseSpectra& n) {
  const std::size_t len = n.size();
  if (len == 0 || n.theta_minus.size() != len) fail(ErrorCode::LengthMismatch, "theta arrays differ in length");
  std::vector<double> v(2 * len);
  for (std::size_t k = 0; k < len; ++k) {
    if (n.theta_plus[k] > n.theta_minus[k] * (1.0 + region_tol))
      fail(ErrorCode::RegionViolation, "theta+ exceeds theta- at bin " + std::to_string(k));
    v[k] = 2.0 * n.theta_plus[k];
    v[2 * len - 1 - k] = 2.0 * n.theta_minus[k];
  }
  return {Spectrum(std::move(v))};
}

inline constexpr double shaper_tap_floor = 1e-9;

inline ShapingFilter noise_shaper(const Spectrum& mask, int order, std::size_t max_taps = 1u << 16) {
  ShapingFilter out;
  const PredictorCoeffs q = optimal_predictor(mask, order);
  out.predictor_order = order;
  out.innovation_variance = q.innovation_variance;
  out.entropy_power = entropy_power(mask);

  // 1/(1 - Q) by long division; c_k are its taps for k >= 1.
  const auto& a = q.coeffs;
  std::vector<double> h(max_taps + 1, 0.0);
  h[0] = 1.0;
  std::size_t quiet = 0, computed = max_taps;
  for (std::size_t m = 1; m <= max_taps; ++m) {
    double acc = 0.0;
    const std::size_t kmax = std::min(m, a.size());
    for (std::size_t k = 1; k <= kmax; ++k) acc += a[k - 1] * h[m - k];
    h[m] = acc;
    quiet = std::fabs(acc) < shaper_tap_floor ? quiet + 1 : 0;
    if (quiet > a.size()) {
      computed = m;
      break;
    }
  }
  std::size_t last = 0;
  for (std::size_t m = 1; m <= computed; ++m)
    if (std::fabs(h[m]) >= shaper_tap_floor) last = m;
  out.coeffs.assign(h.begin() + 1, h.begin() + 1 + static_cast<std::ptrdiff_t>(last));

  // Relative to the energy of 1 + C, so a flat mask's rounding dust is not a tail.
  double total = 1.0, tail = 0.0;
  for (std::size_t m = 1; m <= computed; ++m) {
    total += h[m] * h[m];
    if (m > last) tail += h[m] * h[m];
  }
  if (computed == max_taps) {
    // Did not decay: charge the last block as a lower bound on the tail.
    for (std::size_t m = max_taps - a.size(); m <= max_taps; ++m) tail += h[m] * h[m];
  }
  out.tail_energy = tail / total;
  out.truncation_warning = computed == max_taps || out.tail_energy > 1e-6;
  return out;
}

// |1 + C(e^{jw})|^2
inline double shaping_gain(const ShapingFilter& c, double w) {
  std::complex<double> acc(1.0, 0.0);
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) acc += c.coeffs[k] * std::polar(1.0, -static_cast<double>(k + 1) * w);
  return std::norm(acc);
}

inline PrePostFilters pre_post_filters(const Spectrum& s, const NoiseSpectra& n) {
  const std::size_t len = s.size();
  if (n.size() != len || n.theta_minus.size() != len) fail(ErrorCode::LengthMismatch, "noise spectra do not match the source grid");
  std::vector<double> f(len), g(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double sk = s[k], tp = n.theta_plus[k], tm = n.theta_minus[k];
    double rem = sk - tp - tm;
    if (rem < -region_tol * sk) fail(ErrorCode::NegativeRadicand, "S - theta+ - theta- < 0 at bin " + std::to_string(k));
    rem = std::max(rem, 0.0);
    f[k] = std::sqrt(rem / sk);
    const double gap = sk - tm;
    if (!(gap > 0.0)) fail(ErrorCode::NegativeRadicand, "theta- reaches S at bin " + std::to_string(k));
    g[k] = std::sqrt(sk * rem) / gap;
  }
  return {Spectrum(std::move(f)), Spectrum(std::move(g))};
}

inline Spectrum sd_prefilter(const Spectrum& s, const Spectrum& mask) {
  if (s.size() != mask.size()) fail(ErrorCode::LengthMismatch, "mask and source grids differ");
  std::vector<double> f(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double rem = s[k] - mask[k];
    if (rem < -region_tol * s[k]) fail(ErrorCode::MaskExceedsSource, "mask exceeds the source at bin " + std::to_string(k));
    f[k] = s[k] > 0.0 ? std::sqrt(std::max(rem, 0.0) / s[k]) : 0.0;
  }
  return Spectrum(std::move(f));
}

inline constexpr int default_halfband_taps = 255;

// Kaiser-windowed sinc with cutoff pi/2. The center tap is exactly 1/2 and the
// even-offset taps are exactly zero; the odd taps are scaled so the DC gain is 1.
inline std::vector<double> halfband_interpolator(int taps = default_halfband_taps) {
  if (taps < 63 || taps % 2 == 0) fail(ErrorCode::InvalidConfig, "half-band length must be odd and at least 63");
  const int m = (taps - 1) / 2;
  constexpr double attenuation_db = 70.0;
  const double beta = 0.1102 * (attenuation_db - 8.7);
  const double norm = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(static_cast<std::size_t>(taps), 0.0);
  double odd_sum = 0.0;
  for (int k = -m; k <= m; ++k) {
    if (k == 0 || k % 2 == 0) continue;
    const double x = static_cast<double>(k) / m;
    const double win = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / norm;
    const double sinc = std::sin(0.5 * std::numbers::pi * k) / (std::numbers::pi * k);
    h[static_cast<std::size_t>(k + m)] = sinc * win;
    odd_sum += sinc * win;
  }
  for (int k = -m; k <= m; k += 1)
    if (k % 2 != 0) h[static_cast<std::size_t>(k + m)] *= 0.5 / odd_sum;
  h[static_cast<std::size_t>(m)] = 0.5;
  return h;
}

// Zero-phase frequency response of a symmetric FIR with the center at index m.
inline double fir_response(std::span<const double> h, double w) {
  const std::size_t m = (h.size() - 1) / 2;
  double acc = h[m];
  for (std::size_t k = 1; k <= m; ++k) acc += 2.0 * h[m + k] * std::cos(static_cast<double>(k) * w);
  return acc;
}

}  // namespace mdrdf
