#pragma once

// Exhaustive per-frequency minimizer, independent of the cubic closed form.
// Used by tests and the verify command only.

#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "spectral_solver.hpp"

namespace mdrdf {

struct BruteForceResult {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  bool at_corner = false;
};

namespace detail {

// L(tp, tm) - L(cp, cm) without cancellation.
inline double lagrangian_delta(double s, double cp, double cm, double tp, double tm, const LagrangePair& lam) {
  const double dp = tp - cp, dm = tm - cm;
  const double gc = s - cm, g = s - tm;
  return -0.25 * std::log1p(dp / cp) - 0.25 * std::log1p(dm / cm) + lam.lambda1 * (dp + dm) +
         lam.lambda2 * s * (dp * gc + cp * dm) / (g * gc);
}

inline bool in_closed_triangle(double s, double tp, double tm) {
  return tp > 0.0 && tm >= tp && tm <= 0.5 * s;
}

// Zoom around (cp, cm): a 21x21 local lattice of half-width w, shrinking
// whenever the best point is not on the lattice edge.
inline void zoom_refine(double s, const LagrangePair& lam, double& cp, double& cm, double w) {
  constexpr int half = 10;
  for (int it = 0; it < 2000 && w > 1e-15 * s; ++it) {
    const double step = w / half;
    double best_delta = 0.0;
    int ba = 0, bb = 0;
    double np = cp, nm = cm;
    for (int a = -half; a <= half; ++a) {
      for (int b = -half; b <= half; ++b) {
        if (a == 0 && b == 0) continue;
        double tp = cp + a * step, tm = cm + b * step;
        if (tm > 0.5 * s) tm = 0.5 * s;
        if (tp > tm) tp = tm;
        if (!in_closed_triangle(s, tp, tm)) continue;
        const double d = lagrangian_delta(s, cp, cm, tp, tm, lam);
        if (d < best_delta) {
          best_delta = d;
          ba = a;
          bb = b;
          np = tp;
          nm = tm;
        }
      }
    }
    cp = np;
    cm = nm;
    if (std::abs(ba) < half && std::abs(bb) < half) w *= 0.25;
  }
}

}  // namespace detail

inline BruteForceResult brute_force_frequency(double s, const LagrangePair& lam, int grid = 200) {
  if (grid < 100) fail(ErrorCode::InvalidConfig, "brute-force grid must be at least 100");
  if (!(s > 0.0)) fail(ErrorCode::DomainError, "spectrum value must be positive");
  const double h = 0.5 * s / grid;

  double best = std::numeric_limits<double>::infinity();
  double cp = 0.0, cm = 0.0;
  for (int i = 1; i <= grid; ++i) {
    const double tm = i * h;
    for (int j = 1; j <= i; ++j) {
      const double tp = j * h;
      const double v = lagrangian(s, tp, tm, lam);
      if (v < best) {
        best = v;
        cp = tp;
        cm = tm;
      }
    }
  }

  detail::zoom_refine(s, lam, cp, cm, 2.0 * h);

  BruteForceResult r{cp, cm, false};
  r.at_corner = 0.5 * s - cm <= 1e-9 * s && 0.5 * s - cp <= 1e-9 * s;
  return r;
}

// Interior local minima: every strict discrete minimum of the mesh is refined
// by the local zoom, and refined points closer than 1e-6 S are merged.
inline std::vector<BruteForceResult> interior_local_minima(double s, const LagrangePair& lam, int grid = 200) {
  const double h = 0.5 * s / grid;
  auto value = [&](int i, int j) { return lagrangian(s, j * h, i * h, lam); };
  std::vector<BruteForceResult> found;
  for (int i = 2; i < grid; ++i) {
    for (int j = 1; j < i; ++j) {
      const double v = value(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (jj < 1 || jj > ii || ii > grid) continue;
          if (!(v < value(ii, jj))) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;
      double cp = j * h, cm = i * h;
      detail::zoom_refine(s, lam, cp, cm, 2.0 * h);
      const bool on_edge = 0.5 * s - cm <= 1e-9 * s || cm - cp <= 1e-9 * s;
      if (on_edge) continue;
      bool dup = false;
      for (const auto& f : found)
        if (std::fabs(f.theta_plus - cp) < 1e-6 * s && std::fabs(f.theta_minus - cm) < 1e-6 * s) dup = true;
      if (!dup) found.push_back({cp, cm, false});
    }
  }
  return found;
}

}  // namespace mdrdf
