#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>
#include <utility>

#include "error.hpp"
#include "white_md.hpp"

namespace mdrdf {

struct LagrangePair {
  double lambda1;
  double lambda2;

  LagrangePair(double l1, double l2) : lambda1(l1), lambda2(l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
      fail(ErrorCode::DomainError, "Lagrange multipliers must be finite and strictly positive");
  }
};

// Monic cubic x^3 + a2 x^2 + a1 x + a0.
struct CubicCoeffs {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  double operator()(double x) const { return ((x + a2) * x + a1) * x + a0; }
  double derivative(double x) const { return (3.0 * x + 2.0 * a2) * x + a1; }
  // Sum of term magnitudes: the scale against which a residual is relative.
  double scale(double x) const {
    const double ax = std::fabs(x);
    return ax * ax * ax + std::fabs(a2) * ax * ax + std::fabs(a1) * ax + std::fabs(a0);
  }
  double relative_residual(double x) const {
    const double s = scale(x);
    return s > 0.0 ? std::fabs((*this)(x)) / s : 0.0;
  }
};

struct CubicDiagnostics {
  double a2 = 0.0, a1 = 0.0, a0 = 0.0;
  double p = 0.0, q = 0.0, xi = 0.0;
  double phi = std::numeric_limits<double>::quiet_NaN();  // only when three real roots

  CubicCoeffs coeffs() const { return {a2, a1, a0}; }
  // Near-zero discriminants take the single-real-root branch.
  bool three_real() const { return xi < 0.0 && std::fabs(xi) >= 1e-12 * std::max(q * q, std::fabs(p * p * p)); }
};

struct CubicRoots {
  std::complex<double> x1, x2, x3;
  bool three_real = false;
};

struct FrequencySolution {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  bool on_boundary = false;
  CubicDiagnostics diagnostics;
};

inline void check_inputs(double s, const LagrangePair&) {
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::DomainError, "spectrum value must be finite and positive");
}

inline CubicCoeffs cubic_coeffs(double s, const LagrangePair& lam) {
  check_inputs(s, lam);
  const double l1 = lam.lambda1, l2 = lam.lambda2;
  const double d = 4.0 * l1 * l1;
  return {-(4.0 * l1 * l2 * s + 8.0 * l1 * l1 * s + l1) / d,
          (2.0 * l1 * s + 2.0 * l2 * s + 4.0 * l1 * l2 * s * s + 4.0 * l1 * l1 * s * s) / d,
          -s * s * (l2 + l1) / d};
}

// Reduced-cubic quantities of an arbitrary monic cubic.
inline CubicDiagnostics reduce_cubic(const CubicCoeffs& c) {
  CubicDiagnostics d;
  d.a2 = c.a2;
  d.a1 = c.a1;
  d.a0 = c.a0;
  d.p = c.a1 / 3.0 - c.a2 * c.a2 / 9.0;
  d.q = (c.a1 * c.a2 - 3.0 * c.a0) / 6.0 - c.a2 * c.a2 * c.a2 / 27.0;
  d.xi = d.q * d.q + d.p * d.p * d.p;
  if (d.three_real()) d.phi = std::atan2(std::sqrt(-d.xi), d.q);
  return d;
}

namespace detail {

// p and q written directly in terms of (S, lambda1, lambda2); lambda2 is not
// range-checked so the discriminant can be probed at its negative roots.
inline std::pair<double, double> closed_form_pq(double s, double l1, double l2) {
  const double s2 = s * s, s3 = s2 * s;
  const double p =
      -(-8.0 * l1 * s - 16.0 * l2 * s + 16.0 * l1 * l2 * s2 + 16.0 * l1 * l1 * s2 + 16.0 * s2 * l2 * l2 + 1.0) /
      (144.0 * l1 * l1);
  const double q = -(96.0 * l1 * l2 * s2 - 48.0 * l1 * l1 * s2 - 64.0 * l2 * l2 * l2 * s3 - 96.0 * l2 * l2 * s3 * l1 +
                     96.0 * l2 * l2 * s2 + 96.0 * l2 * s3 * l1 * l1 + 24.0 * l2 * s + 64.0 * l1 * l1 * l1 * s3 +
                     12.0 * l1 * s - 1.0) /
                   (1728.0 * l1 * l1 * l1);
  return {p, q};
}

}  // namespace detail

inline CubicDiagnostics discriminant(double s, const LagrangePair& lam) {
  const CubicCoeffs c = cubic_coeffs(s, lam);
  CubicDiagnostics d;
  d.a2 = c.a2;
  d.a1 = c.a1;
  d.a0 = c.a0;
  std::tie(d.p, d.q) = detail::closed_form_pq(s, lam.lambda1, lam.lambda2);
  d.xi = d.q * d.q + d.p * d.p * d.p;
  if (d.three_real()) {
    // arctan(sqrt(-xi)/q), shifted by pi for q < 0 and equal to pi/2 at q = 0
    d.phi = std::atan2(std::sqrt(-d.xi), d.q);
  }
  return d;
}

namespace detail {

// Newton steps that are kept only while they shrink the residual.
inline double polish_root(const CubicCoeffs& c, double x) {
  double fx = std::fabs(c(x));
  for (int it = 0; it < 3 && fx > 0.0; ++it) {
    const double dfx = c.derivative(x);
    if (dfx == 0.0) break;
    const double y = x - c(x) / dfx;
    const double fy = std::fabs(c(y));
    if (!(fy < fx)) break;
    x = y;
    fx = fy;
  }
  return x;
}

}  // namespace detail

inline CubicRoots cubic_roots(const CubicDiagnostics& d) {
  const CubicCoeffs c = d.coeffs();
  const double shift = d.a2 / 3.0;
  CubicRoots r;
  if (d.three_real()) {
    const double rho = std::sqrt(-d.p);
    const double phi = std::isnan(d.phi) ? std::atan2(std::sqrt(-d.xi), d.q) : d.phi;
    const double cs = std::cos(phi / 3.0), sn = std::sin(phi / 3.0);
    const double s3 = std::numbers::sqrt3;
    r.x1 = detail::polish_root(c, 2.0 * rho * cs - shift);
    r.x2 = detail::polish_root(c, -rho * (cs + s3 * sn) - shift);
    r.x3 = detail::polish_root(c, -rho * (cs - s3 * sn) - shift);
    r.three_real = true;
    return r;
  }
  // Cardano with real cube roots; s1 s2 = -p, so the smaller one follows from
  // the larger without cancellation.
  const double sq = std::sqrt(std::max(d.xi, 0.0));
  const double big = std::cbrt(d.q + (d.q >= 0.0 ? sq : -sq));
  const double small = big != 0.0 ? -d.p / big : 0.0;
  const double sum = big + small;
  r.x1 = detail::polish_root(c, sum - shift);
  const double re = -0.5 * sum - shift;
  const double im = 0.5 * std::numbers::sqrt3 * (big - small);
  r.x2 = {re, im};
  r.x3 = {re, -im};
  return r;
}

inline double theta_plus_of_psi(double s, const LagrangePair& lam, double psi) {
  check_inputs(s, lam);
  if (!(psi > 0.0) || !(psi <= s)) fail(ErrorCode::DomainError, "psi must lie in (0, S]");
  const double den = 4.0 * s * (lam.lambda1 + lam.lambda2) - 4.0 * lam.lambda1 * psi;
  if (!(den > 0.0)) fail(ErrorCode::DenominatorSignError, "theta+ denominator is not positive");
  return (s - psi) / den;
}

inline std::optional<double> stationary_psi(double s, const LagrangePair& lam, const CubicDiagnostics& d) {
  const CubicRoots r = cubic_roots(d);
  const double psi = r.three_real ? r.x2.real() : r.x1.real();
  if (!(psi > 0.0) || !(psi <= 0.5 * s * (1.0 + region_tol))) return std::nullopt;
  const double den = 4.0 * s * (lam.lambda1 + lam.lambda2) - 4.0 * lam.lambda1 * psi;
  if (!(den > 0.0)) return std::nullopt;
  const double tp = (s - psi) / den;
  if (!(tp > 0.0) || tp > psi * (1.0 + region_tol)) return std::nullopt;
  return std::min(psi, 0.5 * s);
}

inline std::optional<double> stationary_psi(double s, const LagrangePair& lam) {
  return stationary_psi(s, lam, discriminant(s, lam));
}

inline bool in_support(double s, const LagrangePair& lam, double psi) {
  return 2.0 * lam.lambda1 * s + 8.0 * lam.lambda2 * psi > 1.0;
}

inline FrequencySolution solve_frequency(double s, const LagrangePair& lam, const CubicDiagnostics& d) {
  FrequencySolution out;
  out.diagnostics = d;
  const double half = 0.5 * s;
  if (const auto psi = stationary_psi(s, lam, d); psi && in_support(s, lam, *psi)) {
    const double tp = std::min(theta_plus_of_psi(s, lam, *psi), *psi);
    const double tol = region_tol * s;
    const bool at_corner = half - *psi <= tol && half - tp <= tol;
    if (tp > tol && !at_corner) {
      out.theta_plus = tp;
      out.theta_minus = *psi;
      return out;
    }
  }
  out.theta_plus = half;
  out.theta_minus = half;
  out.on_boundary = true;
  return out;
}

inline FrequencySolution solve_frequency(double s, const LagrangePair& lam) {
  return solve_frequency(s, lam, discriminant(s, lam));
}

inline double lagrangian(double s, double tp, double tm, const LagrangePair& lam) {
  if (!(s > 0.0) || !(tp > 0.0) || !(tm > 0.0) || !(tm < s))
    fail(ErrorCode::DomainError, "lagrangian evaluated outside its domain");
  return 0.5 * std::log(s / (2.0 * std::sqrt(tp * tm))) + lam.lambda1 * (tp + tm) + lam.lambda2 * s * tp / (s - tm);
}

// (dL/dtheta+, dL/dtheta-)
inline std::pair<double, double> lagrangian_gradient(double s, double tp, double tm, const LagrangePair& lam) {
  if (!(s > 0.0) || !(tp > 0.0) || !(tm > 0.0) || !(tm < s))
    fail(ErrorCode::DomainError, "gradient evaluated outside its domain");
  const double g = s - tm;
  return {-0.25 / tp + lam.lambda1 + lam.lambda2 * s / g, -0.25 / tm + lam.lambda1 + lam.lambda2 * s * tp / (g * g)};
}

// Closed-form roots of the discriminant (as a quartic in lambda2) and of q
// (as a cubic in lambda2) for fixed S and lambda1.
struct ReducedCubicRoots {
  std::array<double, 4> xi_disc{};
  std::array<double, 3> xi_q{};
  double phi_q = 0.0;
};

inline ReducedCubicRoots reduced_roots(double s, double l1) {
  if (!(s > 0.0) || !(l1 > 0.0)) fail(ErrorCode::DomainError, "reduced-cubic roots need S > 0 and lambda1 > 0");
  ReducedCubicRoots a;
  const double sl = s * l1;
  const double base = 2.0 * sl + 8.0 * sl * sl * sl - 16.0 * sl * sl - 3.0;
  const double rad = 2.0 * std::sqrt(2.0 * std::pow(2.0 * sl * sl + 1.0, 3));
  const double den = 4.0 * s * (4.0 * sl * sl + 1.0);
  a.xi_disc = {0.0, -l1, -(base + rad) / den, -(base - rad) / den};

  const double r = std::sqrt(6.0) * std::sqrt(2.0 * sl * sl + 1.0) / (4.0 * s);
  const double sl2 = sl * sl, sl4 = sl2 * sl2, sl6 = sl4 * sl2;
  a.phi_q = std::atan(std::sqrt(768.0 * sl6 + 1152.0 * sl4 + 576.0 * sl2 + 15.0) / 9.0);
  const double c = std::cos(a.phi_q / 3.0), sn = std::sin(a.phi_q / 3.0);
  const double off = -0.5 * l1 + 0.5 / s;
  const double s3 = std::numbers::sqrt3;
  a.xi_q = {2.0 * r * c + off, -r * (s3 * sn + c) + off, r * (s3 * sn - c) + off};
  return a;
}

// The discriminant factored over its roots in lambda2.
inline double discriminant_product_form(double s, double l1, double l2) {
  const ReducedCubicRoots a = reduced_roots(s, l1);
  const double lead = -std::pow(s, 4) * (4.0 * l1 * l1 * s * s + 1.0) / (432.0 * std::pow(l1, 6));
  return lead * l2 * (l2 + l1) * (l2 - a.xi_disc[2]) * (l2 - a.xi_disc[3]);
}

}  // namespace mdrdf
