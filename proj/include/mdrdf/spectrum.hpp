#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mdrdf {

inline constexpr std::size_t default_grid_size = 4096;
inline constexpr int default_predictor_order = 32;

// Power spectral density on the midpoint grid w_k = (k + 1/2) pi / N over (0, pi).
class Spectrum {
 public:
  Spectrum() = default;

  explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorCode::InvalidConfig, "spectrum needs at least one grid point");
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        fail(ErrorCode::NonPositiveSpectrum, "spectrum values must be finite and nonnegative");
    }
  }

  template <class F>
  static Spectrum sample(std::size_t n, F&& fn) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = fn(omega(k, n));
    return Spectrum(std::move(v));
  }

  static double omega(std::size_t k, std::size_t n) {
    return (static_cast<double>(k) + 0.5) * std::numbers::pi / static_cast<double>(n);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double omega(std::size_t k) const { return omega(k, size()); }
  std::span<const double> values() const noexcept { return values_; }

  double variance() const {
    double acc = 0.0;
    for (double v : values_) acc += v;
    return acc / static_cast<double>(size());
  }

  double min() const {
    double m = values_.front();
    for (double v : values_) m = std::min(m, v);
    return m;
  }

  double max() const {
    double m = values_.front();
    for (double v : values_) m = std::max(m, v);
    return m;
  }

  // Linear interpolation at an arbitrary frequency, folded into [0, pi] and
  // clamped to the outermost grid points.
  double at(double w) const {
    constexpr double pi = std::numbers::pi;
    w = std::fabs(std::remainder(w, 2.0 * pi));
    const double n = static_cast<double>(size());
    const double pos = w * n / pi - 0.5;
    if (pos <= 0.0) return values_.front();
    if (pos >= n - 1.0) return values_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return values_[i] * (1.0 - t) + values_[i + 1] * t;
  }

 private:
  std::vector<double> values_;
};

struct PredictorCoeffs {
  std::vector<double> coeffs;  // a_1..a_P in x[n] = sum a_k x[n-k] + e[n]
  double innovation_variance = 1.0;
  std::vector<double> reflection;

  int order() const noexcept { return static_cast<int>(coeffs.size()); }
};

inline Spectrum flat_spectrum(double variance, std::size_t n = default_grid_size) {
  return Spectrum(std::vector<double>(n, variance));
}

inline Spectrum cosine_spectrum(std::size_t n = default_grid_size) {
  return Spectrum::sample(n, [](double w) { return std::cos(w) + 1.0; });
}

inline double entropy_power(const Spectrum& s) {
  double acc = 0.0;
  for (double v : s.values()) {
    if (!(v > 0.0)) fail(ErrorCode::NonPositiveSpectrum, "entropy power needs a strictly positive spectrum");
    acc += std::log(v);
  }
  return std::exp(acc / static_cast<double>(s.size()));
}

inline std::vector<double> autocorrelation(const Spectrum& s, int lags) {
  if (lags < 0 || static_cast<std::size_t>(lags) > s.size() / 2)
    fail(ErrorCode::LagTooLarge, "lag " + std::to_string(lags) + " exceeds half the grid size");
  const std::size_t n = s.size();
  std::vector<double> r(static_cast<std::size_t>(lags) + 1, 0.0);
  for (int m = 0; m <= lags; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += s[k] * std::cos(m * s.omega(k));
    r[static_cast<std::size_t>(m)] = acc / static_cast<double>(n);
  }
  return r;
}

// Levinson-Durbin on the Yule-Walker equations.
inline PredictorCoeffs levinson(std::span<const double> r, int order) {
  if (order < 1) fail(ErrorCode::InvalidConfig, "predictor order must be at least 1");
  if (r.size() < static_cast<std::size_t>(order) + 1) fail(ErrorCode::LagTooLarge, "not enough autocorrelation lags");
  if (!(r[0] > 0.0)) fail(ErrorCode::NonPositiveSpectrum, "zero-variance spectrum");

  PredictorCoeffs out;
  std::vector<double>& a = out.coeffs;
  a.reserve(static_cast<std::size_t>(order));
  double err = r[0];
  std::vector<double> prev;
  for (int k = 1; k <= order; ++k) {
    double acc = r[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) acc -= a[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(k - j)];
    const double kappa = acc / err;
    if (!(std::fabs(kappa) < 1.0))
      fail(ErrorCode::SingularToeplitz, "reflection coefficient " + std::to_string(kappa) + " at order " + std::to_string(k));
    prev = a;
    for (int j = 1; j < k; ++j)
      a[static_cast<std::size_t>(j - 1)] = prev[static_cast<std::size_t>(j - 1)] - kappa * prev[static_cast<std::size_t>(k - j - 1)];
    a.push_back(kappa);
    out.reflection.push_back(kappa);
    err *= (1.0 - kappa * kappa);
  }
  if (!(err > 0.0)) fail(ErrorCode::SingularToeplitz, "prediction error variance collapsed to zero");
  out.innovation_variance = err;
  return out;
}

inline PredictorCoeffs optimal_predictor(const Spectrum& s, int order = default_predictor_order) {
  if (order < 1) fail(ErrorCode::InvalidConfig, "predictor order must be at least 1");
  if (!(s.min() > 0.0)) fail(ErrorCode::NonPositiveSpectrum, "predictor needs a strictly positive spectrum");
  const auto r = autocorrelation(s, order);
  return levinson(r, order);
}

// |1 - sum a_m e^{-j m w}|^2
inline double predictor_error_gain(std::span<const double> a, double w) {
  std::complex<double> acc(1.0, 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) acc -= a[m] * std::polar(1.0, -static_cast<double>(m + 1) * w);
  return std::norm(acc);
}

inline Spectrum spectrum_from_predictor(const PredictorCoeffs& c, std::size_t n = default_grid_size) {
  return Spectrum::sample(n, [&](double w) { return c.innovation_variance / predictor_error_gain(c.coeffs, w); });
}

// Step-down recursion: 1 - A(z) is minimum phase iff every reflection
// coefficient has magnitude below one.
inline bool is_minimum_phase(std::span<const double> coeffs) {
  std::vector<double> a(coeffs.begin(), coeffs.end());
  for (std::size_t m = a.size(); m >= 1; --m) {
    const double kappa = a[m - 1];
    if (!(std::fabs(kappa) < 1.0)) return false;
    std::vector<double> lower(m - 1);
    for (std::size_t j = 1; j < m; ++j) lower[j - 1] = (a[j - 1] + kappa * a[m - j - 1]) / (1.0 - kappa * kappa);
    a = std::move(lower);
  }
  return true;
}

inline Spectrum ar_spectrum(std::vector<double> coeffs, double innovation_variance, std::size_t n = default_grid_size) {
  PredictorCoeffs c;
  c.coeffs = std::move(coeffs);
  c.innovation_variance = innovation_variance;
  return spectrum_from_predictor(c, n);
}

struct Regularized {
  Spectrum spectrum;
  double distortion_offset = 0.0;  // D_eps, to be added to distortion targets
};

inline Regularized regularize(const Spectrum& s, double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidConfig, "regularization floor must be positive");
  std::vector<double> v(s.values().begin(), s.values().end());
  double clipped = 0.0;
  for (double& x : v) {
    if (x < eps) {
      clipped += eps - x;
      x = eps;
    }
  }
  return {Spectrum(std::move(v)), clipped / static_cast<double>(s.size())};
}

}  // namespace mdrdf
