#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "spectral_solver.hpp"
#include "spectrum.hpp"
#include "white_md.hpp"

namespace mdrdf {

struct NoiseSpectra {
  std::vector<double> theta_plus;
  std::vector<double> theta_minus;
  std::vector<bool> boundary_mask;

  std::size_t size() const noexcept { return theta_plus.size(); }
};

struct RdfPoint {
  LagrangePair lambdas{1.0, 1.0};
  double rate = 0.0;  // nats per sample per description
  double d_side = 0.0;
  double d_central = 0.0;
  NoiseSpectra spectra;

  std::size_t support_count() const {
    return static_cast<std::size_t>(std::count(spectra.boundary_mask.begin(), spectra.boundary_mask.end(), false));
  }
};

inline constexpr double nats_to_bits = 1.4426950408889634;

inline double rate_density(double s, double tp, double tm) {
  const double tol = region_tol * s;
  if (!(s > 0.0) || !(tp > 0.0) || tp > tm + tol || tm > 0.5 * s + tol)
    fail(ErrorCode::DomainError, "rate density needs 0 < theta+ <= theta- <= S/2");
  if (tp == 0.5 * s && tm == 0.5 * s) return 0.0;
  return std::max(0.0, 0.5 * std::log(s / (2.0 * std::sqrt(tp * tm))));
}

inline double side_density(double, double tp, double tm) { return tp + tm; }
inline double central_density(double s, double tp, double tm) { return s * tp / (s - tm); }

struct RdfSummary {
  double rate = 0.0;
  double d_side = 0.0;
  double d_central = 0.0;
};

namespace detail {

inline void require_positive(const Spectrum& s) {
  if (!(s.min() > 0.0)) fail(ErrorCode::NonPositiveSpectrum, "regularize the spectrum before solving");
}

template <class Sink>
RdfSummary integrate(const Spectrum& s, const LagrangePair& lam, Sink&& sink) {
  double rate = 0.0, ds = 0.0, dc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double sk = s[k];
    const FrequencySolution f = solve_frequency(sk, lam);
    sink(k, f);
    if (f.on_boundary) {
      ds += sk;
      dc += sk;
    } else {
      rate += rate_density(sk, f.theta_plus, f.theta_minus);
      ds += side_density(sk, f.theta_plus, f.theta_minus);
      dc += central_density(sk, f.theta_plus, f.theta_minus);
    }
  }
  const double n = static_cast<double>(s.size());
  return {rate / n, ds / n, dc / n};
}

}  // namespace detail

inline RdfSummary evaluate_summary(const Spectrum& s, const LagrangePair& lam) {
  detail::require_positive(s);
  return detail::integrate(s, lam, [](std::size_t, const FrequencySolution&) {});
}

inline RdfPoint evaluate(const Spectrum& s, const LagrangePair& lam) {
  detail::require_positive(s);
  RdfPoint pt{lam, 0.0, 0.0, 0.0, {}};
  const std::size_t n = s.size();
  pt.spectra.theta_plus.resize(n);
  pt.spectra.theta_minus.resize(n);
  pt.spectra.boundary_mask.resize(n);
  const RdfSummary sum = detail::integrate(s, lam, [&](std::size_t k, const FrequencySolution& f) {
    pt.spectra.theta_plus[k] = f.theta_plus;
    pt.spectra.theta_minus[k] = f.theta_minus;
    pt.spectra.boundary_mask[k] = f.on_boundary;
  });
  pt.rate = sum.rate;
  pt.d_side = sum.d_side;
  pt.d_central = sum.d_central;
  return pt;
}

inline ThetaPair high_rate_approx(const LagrangePair& lam) {
  return {0.25 / (lam.lambda1 + lam.lambda2), 0.25 / lam.lambda1};
}

struct FitOptions {
  double lambda_min = 1e-4;
  double lambda_max = 1e4;
  int coarse = 24;
  int refine_rounds = 3;
  int max_iterations = 200;
};

namespace detail {

// Illinois-modified regula falsi for a decreasing g on [lo, hi] with
// g(lo) > 0 > g(hi); x is searched in log space.
template <class G>
std::optional<double> log_root(G&& g, double lo, double hi, double glo, double ghi, double ftol, int max_iter) {
  double a = std::log(lo), b = std::log(hi);
  double fa = glo, fb = ghi;
  int side = 0;
  for (int it = 0; it < max_iter; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = g(std::exp(c));
    if (std::fabs(fc) <= ftol || (b - a) < 1e-15 * std::max(1.0, std::fabs(c))) return std::exp(c);
    if ((fc > 0.0) == (fa > 0.0)) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return std::nullopt;
}

inline bool meets(const RdfSummary& r, const DistortionPair& t, double tol) {
  return r.d_side <= t.d_side + tol && r.d_central <= t.d_central + tol;
}

struct Candidate {
  double l1 = 0.0, l2 = 0.0;
  RdfSummary sum;
};

inline bool better(const Candidate& a, const Candidate& b) {
  if (a.sum.rate != b.sum.rate) return a.sum.rate < b.sum.rate;
  return a.l1 + a.l2 < b.l1 + b.l2;
}

// Log-spaced grid over [lo1, hi1] x [lo2, hi2]; returns the best candidate
// meeting the targets.
inline std::optional<Candidate> grid_search(const Spectrum& s, const DistortionPair& t, double tol, double lo1,
                                            double hi1, double lo2, double hi2, int n) {
  std::vector<Candidate> cells(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  auto at = [n](double lo, double hi, int i) {
    return n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  };
  parallel_for(cells.size(), [&](std::size_t idx) {
    Candidate& c = cells[idx];
    c.l1 = at(lo1, hi1, static_cast<int>(idx) / n);
    c.l2 = at(lo2, hi2, static_cast<int>(idx) % n);
    c.sum = evaluate_summary(s, {c.l1, c.l2});
  });
  std::optional<Candidate> best;
  for (const auto& c : cells)
    if (meets(c.sum, t, tol) && (!best || better(c, *best))) best = c;
  return best;
}

}  // namespace detail

inline RdfPoint fit_lambdas(const Spectrum& s, DistortionPair target, double tol = 1e-5, const FitOptions& opt = {}) {
  detail::require_positive(s);
  if (!(tol > 0.0)) fail(ErrorCode::InvalidConfig, "fit tolerance must be positive");
  const double var = s.variance();
  if (!(target.d_side > 0.0) || !(target.d_central > 0.0) || target.d_central > target.d_side + tol ||
      target.d_side > var + tol)
    fail(ErrorCode::TargetInfeasible, "targets must satisfy 0 < D_C <= D_S <= variance");
  const double lo = opt.lambda_min, hi = opt.lambda_max;
  const double ftol = 0.1 * tol;

  // Inner: lambda1 such that D_S(lambda1, lambda2) hits its target (or is slack).
  auto inner = [&](double l2) -> std::optional<detail::Candidate> {
    const RdfSummary at_lo = evaluate_summary(s, {lo, l2});
    if (at_lo.d_side <= target.d_side + ftol) return detail::Candidate{lo, l2, at_lo};
    const RdfSummary at_hi = evaluate_summary(s, {hi, l2});
    if (at_hi.d_side > target.d_side + ftol) return std::nullopt;
    RdfSummary last;
    double last_l1 = hi;
    auto g = [&](double l1) {
      last = evaluate_summary(s, {l1, l2});
      last_l1 = l1;
      return last.d_side - target.d_side;
    };
    const auto root = detail::log_root(g, lo, hi, at_lo.d_side - target.d_side, at_hi.d_side - target.d_side, ftol,
                                       opt.max_iterations);
    if (!root) return std::nullopt;
    if (last_l1 != *root) last = evaluate_summary(s, {*root, l2});
    return detail::Candidate{*root, l2, last};
  };

  std::optional<detail::Candidate> nested;
  if (auto c_lo = inner(lo); c_lo && c_lo->sum.d_central <= target.d_central + ftol) {
    nested = c_lo;
  } else if (auto c_hi = inner(hi); c_lo && c_hi && c_hi->sum.d_central <= target.d_central + ftol) {
    std::optional<detail::Candidate> last;
    auto h = [&](double l2) {
      last = inner(l2);
      if (!last) return std::numeric_limits<double>::quiet_NaN();
      return last->sum.d_central - target.d_central;
    };
    const auto root = detail::log_root(h, lo, hi, c_lo->sum.d_central - target.d_central,
                                       c_hi->sum.d_central - target.d_central, ftol, opt.max_iterations);
    if (root) {
      if (!last || last->l2 != *root) last = inner(*root);
      if (last && std::isfinite(last->sum.d_central)) nested = last;
    }
  }

  // Coarse grid: seeds the fallback and guards the monotonicity heuristic.
  auto coarse = detail::grid_search(s, target, tol, lo, hi, lo, hi, opt.coarse);
  std::optional<detail::Candidate> best = nested;
  if (nested && !detail::meets(nested->sum, target, tol)) best.reset();
  if (!best || (coarse && coarse->sum.rate < best->sum.rate - tol)) {
    if (!coarse) fail(ErrorCode::TargetInfeasible, "no multiplier pair within the search bounds meets the targets");
    // Zoom rounds around the best grid candidate.
    detail::Candidate c = *coarse;
    double ratio = std::pow(hi / lo, 1.0 / std::max(1, opt.coarse - 1));
    for (int round = 0; round < opt.refine_rounds; ++round) {
      const auto z = detail::grid_search(s, target, tol, std::max(lo, c.l1 / ratio), std::min(hi, c.l1 * ratio),
                                         std::max(lo, c.l2 / ratio), std::min(hi, c.l2 * ratio), opt.coarse);
      if (z && detail::better(*z, c)) c = *z;
      ratio = std::pow(ratio, 2.0 / std::max(1, opt.coarse - 1));
    }
    if (!best || c.sum.rate < best->sum.rate) best = c;
  }
  if (!best) fail(ErrorCode::NoConvergence, "fit did not converge");
  return evaluate(s, {best->l1, best->l2});
}

struct SweepSpec {
  std::vector<double> lambda1;
  std::vector<double> lambda2;

  std::size_t size() const noexcept { return lambda1.size() * lambda2.size(); }
};

inline std::vector<double> log_range(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) fail(ErrorCode::InvalidConfig, "bad logarithmic range");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1));
  return v;
}

inline std::vector<double> linear_range(double lo, double hi, int n) {
  if (!(hi >= lo) || n < 1) fail(ErrorCode::InvalidConfig, "bad linear range");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Row order: lambda1 outer, lambda2 inner.
inline std::vector<RdfPoint> sweep(const Spectrum& s, const SweepSpec& spec) {
  detail::require_positive(s);
  std::vector<std::optional<RdfPoint>> slots(spec.size());
  const std::size_t n2 = spec.lambda2.size();
  parallel_for(slots.size(), [&](std::size_t i) {
    slots[i] = evaluate(s, {spec.lambda1[i / n2], spec.lambda2[i % n2]});
  });
  std::vector<RdfPoint> out;
  out.reserve(slots.size());
  for (auto& p : slots) out.push_back(std::move(*p));
  return out;
}

}  // namespace mdrdf
