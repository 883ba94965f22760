#pragma once

// Property suites behind `mdrdf verify`.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "rdf.hpp"
#include "spectral_solver.hpp"
#include "white_md.hpp"

namespace mdrdf {

struct VerifyOptions {
  std::uint64_t seed = 20240917;
  int samples = 2000;          // random (S, lambda) draws for the algebraic suites
  int oracle_triples = 1000;   // brute-force comparisons
  double cubic_perturbation = 0.0;  // test hook: relative error injected into a0
};

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

namespace detail {

struct Draw {
  double s, l1, l2;
};

// S, lambda1, lambda2 log-uniform on [0.01, 100].
inline std::vector<Draw> random_draws(std::uint64_t seed, int count) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
  std::vector<Draw> v(static_cast<std::size_t>(count));
  for (auto& d : v) d = {std::exp(u(eng)), std::exp(u(eng)), std::exp(u(eng))};
  return v;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

inline double discriminant_raw(double s, double l1, double l2) {
  const auto [p, q] = closed_form_pq(s, l1, l2);
  return q * q + p * p * p;
}

inline double q_raw(double s, double l1, double l2) { return closed_form_pq(s, l1, l2).second; }

// Sums of the magnitudes of the terms of p and q: near a root both collapse
// by cancellation, so residuals are measured against these.
inline double p_scale(double s, double l1, double l2) {
  const double s2 = s * s, a2 = std::fabs(l2);
  return (8.0 * l1 * s + 16.0 * a2 * s + 16.0 * l1 * a2 * s2 + 16.0 * l1 * l1 * s2 + 16.0 * s2 * l2 * l2 + 1.0) /
         (144.0 * l1 * l1);
}

// Sum of the magnitudes of the terms of q, the yardstick for its residual.
inline double q_scale(double s, double l1, double l2) {
  const double s2 = s * s, s3 = s2 * s;
  const double terms[] = {96.0 * l1 * l2 * s2,      48.0 * l1 * l1 * s2, 64.0 * l2 * l2 * l2 * s3, 96.0 * l2 * l2 * s3 * l1,
                          96.0 * l2 * l2 * s2,      96.0 * l2 * s3 * l1 * l1, 24.0 * l2 * s, 64.0 * l1 * l1 * l1 * s3,
                          12.0 * l1 * s,            1.0};
  double acc = 0.0;
  for (double t : terms) acc += std::fabs(t);
  return acc / (1728.0 * l1 * l1 * l1);
}

}  // namespace detail

inline PropertyResult check_cubic_residuals(const VerifyOptions& o) {
  PropertyResult r{.name = "cubic_residuals", .detail = {}};
  double worst = 0.0;
  for (const auto& d : detail::random_draws(o.seed, o.samples)) {
    const LagrangePair lam{d.l1, d.l2};
    CubicDiagnostics diag = discriminant(d.s, lam);
    const CubicCoeffs truth = diag.coeffs();
    if (o.cubic_perturbation != 0.0) diag.a0 *= 1.0 + o.cubic_perturbation;
    const CubicRoots roots = cubic_roots(diag);
    for (const auto& x : {roots.x1, roots.x2, roots.x3}) {
      if (x.imag() != 0.0) continue;
      worst = std::max(worst, truth.relative_residual(x.real()));
    }
  }
  r.passed = worst < 1e-9;
  r.detail = "max relative residual " + detail::fmt(worst);
  return r;
}

inline PropertyResult check_root_ordering(const VerifyOptions& o) {
  PropertyResult r{.name = "root_ordering", .detail = {}};
  int three = 0, bad = 0;
  for (const auto& d : detail::random_draws(o.seed + 1, o.samples)) {
    const CubicDiagnostics diag = discriminant(d.s, {d.l1, d.l2});
    if (!diag.three_real()) continue;
    ++three;
    const CubicRoots x = cubic_roots(diag);
    const double x1 = x.x1.real(), x2 = x.x2.real(), x3 = x.x3.real();
    if (!(x1 >= x3 && x3 >= x2 && x3 > 0.5 * d.s)) ++bad;
  }
  r.passed = bad == 0 && three > 0;
  r.detail = std::to_string(three) + " three-root cases, " + std::to_string(bad) + " violations";
  return r;
}

inline PropertyResult check_discriminant_forms(const VerifyOptions& o) {
  PropertyResult r{.name = "discriminant_forms", .detail = {}};
  double worst_pq = 0.0, worst_prod = 0.0;
  for (const auto& d : detail::random_draws(o.seed + 2, o.samples)) {
    const LagrangePair lam{d.l1, d.l2};
    const CubicDiagnostics closed = discriminant(d.s, lam);
    const CubicDiagnostics generic = reduce_cubic(cubic_coeffs(d.s, lam));
    worst_pq = std::max({worst_pq, std::fabs(closed.p - generic.p) / std::max(std::fabs(generic.p), 1e-300),
                         std::fabs(closed.q - generic.q) / std::max(std::fabs(generic.q), 1e-300)});
    const double scale = std::max(closed.q * closed.q, std::fabs(closed.p * closed.p * closed.p));
    worst_prod = std::max(worst_prod, std::fabs(discriminant_product_form(d.s, d.l1, d.l2) - closed.xi) / scale);
  }
  r.passed = worst_pq < 1e-8 && worst_prod < 1e-8;
  r.detail = "p,q closed vs generic " + detail::fmt(worst_pq) + ", product form " + detail::fmt(worst_prod);
  return r;
}

inline PropertyResult check_reduced_roots(const VerifyOptions& o) {
  PropertyResult r{.name = "reduced_roots", .detail = {}};
  int sign_bad = 0, pos_bad = 0;
  double worst_xi = 0.0, worst_q = 0.0;
  for (const auto& d : detail::random_draws(o.seed + 3, o.samples)) {
    const ReducedCubicRoots a = reduced_roots(d.s, d.l1);
    const double expect = 0.25 / d.s - d.l1;
    if (expect != 0.0 && std::signbit(a.xi_disc[2]) != std::signbit(expect)) ++sign_bad;
    if (!(a.xi_disc[3] > 0.0)) ++pos_bad;
    for (int i : {2, 3}) {
      const double l2 = a.xi_disc[static_cast<std::size_t>(i)];
      const auto [p, q] = detail::closed_form_pq(d.s, d.l1, l2);
      const double ps = detail::p_scale(d.s, d.l1, l2), qs = detail::q_scale(d.s, d.l1, l2);
      worst_xi = std::max(worst_xi, std::fabs(q * q + p * p * p) / std::max(qs * qs, ps * ps * ps));
    }
    for (double l2 : a.xi_q) {
      worst_q = std::max(worst_q, std::fabs(detail::q_raw(d.s, d.l1, l2)) / detail::q_scale(d.s, d.l1, l2));
    }
  }
  r.passed = sign_bad == 0 && pos_bad == 0 && worst_xi < 1e-8 && worst_q < 1e-8;
  r.detail = "sign mismatches " + std::to_string(sign_bad) + ", nonpositive xi3 " + std::to_string(pos_bad) +
             ", discriminant at roots " + detail::fmt(worst_xi) + ", q at roots " + detail::fmt(worst_q);
  return r;
}

inline PropertyResult check_high_rate_limits(const VerifyOptions&) {
  PropertyResult r{.name = "high_rate_limits", .detail = {}};
  std::ostringstream os;
  const LagrangePair big{1e4, 1e6};
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0}) {
    const FrequencySolution f = solve_frequency(s, big);
    worst = std::max({worst, std::fabs(big.lambda1 * f.theta_minus - 0.25),
                      std::fabs((big.lambda1 + big.lambda2) * f.theta_plus - 0.25)});
  }
  const LagrangePair ex2{4.0, 3.0};
  const FrequencySolution f = solve_frequency(2.0, ex2);
  const ThetaPair hr = high_rate_approx(ex2);
  const double db_minus = 10.0 * std::log10(f.theta_minus), db_plus = 10.0 * std::log10(f.theta_plus);
  const double err_minus = std::fabs(db_minus - 10.0 * std::log10(hr.theta_minus));
  const double err_plus = std::fabs(db_plus - 10.0 * std::log10(hr.theta_plus));
  r.passed = worst < 1e-2 && err_minus < 1.0 && err_plus < 1.0;
  os << "max |lambda theta - 1/4| " << detail::fmt(worst) << ", dB gaps " << detail::fmt(err_minus) << " / "
     << detail::fmt(err_plus);
  r.detail = os.str();
  return r;
}

inline PropertyResult check_white_source_reduction(const VerifyOptions& o) {
  PropertyResult r{.name = "white_source_reduction", .detail = {}};
  std::mt19937_64 eng(o.seed + 4);
  std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
  std::uniform_real_distribution<double> var_draw(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  int tested = 0;
  for (int i = 0; i < 100; ++i) {
    const double var = std::exp(var_draw(eng));
    const RdfPoint pt = evaluate(flat_spectrum(var, 64), {std::exp(u(eng)), std::exp(u(eng))});
    const DistortionPair d{pt.d_side, pt.d_central};
    if (pt.spectra.boundary_mask[0]) {
      worst = std::max(worst, pt.rate);
    } else {
      worst = std::max(worst, std::fabs(pt.rate - ozarow_rate(var, d)));
    }
    ++tested;
  }
  r.passed = worst < 1e-6;
  r.detail = std::to_string(tested) + " pairs, max |R - Ozarow| " + detail::fmt(worst) + " nats";
  return r;
}

struct OracleStats {
  int triples = 0;
  int interior = 0;
  double worst_theta = 0.0;
  double worst_gradient = 0.0;
  int max_local_minima = 0;
};

inline OracleStats oracle_stats(std::uint64_t seed, int triples, bool count_minima) {
  OracleStats st;
  for (const auto& d : detail::random_draws(seed, triples)) {
    const LagrangePair lam{d.l1, d.l2};
    const FrequencySolution f = solve_frequency(d.s, lam);
    const BruteForceResult b = brute_force_frequency(d.s, lam, 200);
    st.worst_theta = std::max({st.worst_theta, std::fabs(f.theta_plus - b.theta_plus), std::fabs(f.theta_minus - b.theta_minus)});
    if (!f.on_boundary) {
      ++st.interior;
      const auto [gp, gm] = lagrangian_gradient(d.s, f.theta_plus, f.theta_minus, lam);
      st.worst_gradient = std::max({st.worst_gradient, std::fabs(gp), std::fabs(gm)});
    }
    if (count_minima) st.max_local_minima = std::max(st.max_local_minima, static_cast<int>(interior_local_minima(d.s, lam, 200).size()));
    ++st.triples;
  }
  return st;
}

inline PropertyResult check_oracle_equivalence(const VerifyOptions& o) {
  PropertyResult r{.name = "oracle_equivalence", .detail = {}};
  const OracleStats st = oracle_stats(o.seed + 5, o.oracle_triples, false);
  r.passed = st.worst_theta < 1e-6 && st.worst_gradient < 1e-8;
  r.detail = std::to_string(st.triples) + " triples (" + std::to_string(st.interior) + " interior), max theta gap " +
             detail::fmt(st.worst_theta) + ", max gradient " + detail::fmt(st.worst_gradient);
  return r;
}

inline PropertyResult check_worked_example(const VerifyOptions&) {
  PropertyResult r{.name = "worked_example", .detail = {}};
  const RdfPoint pt = evaluate(cosine_spectrum(), {0.2380, 2.700});
  const double bits = pt.rate * nats_to_bits;
  r.passed = std::fabs(pt.d_side - 0.4000) <= 1e-3 && std::fabs(pt.d_central - 0.0801) <= 1e-3 &&
             std::fabs(bits - 0.7468) <= 1e-3;
  std::ostringstream os;
  os.precision(5);
  os << std::fixed << "R=" << bits << " bits, D_S=" << pt.d_side << ", D_C=" << pt.d_central;
  r.detail = os.str();
  return r;
}

inline std::vector<PropertyResult> run_verify(const VerifyOptions& o = {}) {
  return {check_cubic_residuals(o),        check_root_ordering(o),          check_discriminant_forms(o),
          check_reduced_roots(o),         check_high_rate_limits(o),       check_white_source_reduction(o),
          check_oracle_equivalence(o),     check_worked_example(o)};
}

}  // namespace mdrdf
