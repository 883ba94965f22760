#pragma once

#include <cmath>
#include <utility>

#include "error.hpp"

namespace mdrdf {

inline constexpr double region_tol = 1e-12;

struct ThetaPair {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
};

struct DistortionPair {
  double d_side = 0.0;
  double d_central = 0.0;
};

struct PrepostFactors {
  double alpha_side = 1.0;
  double alpha_central = 1.0;
};

inline bool is_nondegenerate(double var, DistortionPair d) {
  const double tol = region_tol * var;
  if (!(d.d_side <= var + tol)) return false;
  if (!(d.d_central >= 2.0 * d.d_side - var - tol)) return false;
  if (!(d.d_central > 0.0 && d.d_side > 0.0)) return false;
  // 1/D_C >= 2/D_S - 1/var, multiplied through by D_C D_S var > 0
  return d.d_side * var >= (2.0 * var - d.d_side) * d.d_central - tol * var * var;
}

inline double ozarow_rate(double var, DistortionPair d) {
  if (!(var > 0.0) || !is_nondegenerate(var, d))
    fail(ErrorCode::DegenerateDistortion, "distortion pair outside the non-degenerate region");
  const double tol = region_tol * var;
  if (d.d_side >= var - tol && d.d_central >= var - tol) return 0.0;
  const double num = var * (var - d.d_central) * (var - d.d_central);
  const double den = 4.0 * d.d_central * (d.d_side - d.d_central) * (var - d.d_side);
  if (!(den > 0.0)) fail(ErrorCode::DegenerateDistortion, "rate diverges on this boundary");
  return std::max(0.0, 0.25 * std::log(num / den));
}

inline double ozarow_rate_hr(double var, DistortionPair d) {
  const double tol = region_tol * var;
  const bool ok = var > 0.0 && d.d_central > 0.0 && 2.0 * d.d_central <= d.d_side + tol &&
                  d.d_side <= var + tol && d.d_central >= 2.0 * d.d_side - var - tol;
  if (!ok) fail(ErrorCode::DegenerateDistortion, "pair outside the high-resolution region");
  return 0.5 * std::log(var / (2.0 * std::sqrt(d.d_central * (d.d_side - d.d_central))));
}

inline bool in_theta_region(double var, ThetaPair t) {
  const double tol = region_tol * var;
  return t.theta_plus >= -tol && t.theta_plus <= t.theta_minus + tol && t.theta_minus <= 0.5 * var + tol;
}

inline DistortionPair theta_to_distortions(double var, ThetaPair t) {
  if (!(var > 0.0) || !in_theta_region(var, t))
    fail(ErrorCode::RegionViolation, "theta pair outside 0 <= theta+ <= theta- <= var/2");
  return {t.theta_plus + t.theta_minus, var * t.theta_plus / (var - t.theta_minus)};
}

inline PrepostFactors prepost_factors(double var, ThetaPair t) {
  const double tol = region_tol * var;
  if (!(var > 0.0) || t.theta_plus < -tol || t.theta_minus < -tol || t.theta_plus + t.theta_minus > var + tol)
    fail(ErrorCode::RegionViolation, "theta+ + theta- exceeds the source variance");
  const double as = std::sqrt(std::max(0.0, var - t.theta_plus - t.theta_minus) / var);
  const double den = as * as * var + t.theta_plus;
  return {as, den > 0.0 ? as * var / den : 0.0};
}

inline double r0(double var, ThetaPair t) {
  if (!(t.theta_plus > 0.0) || !(t.theta_minus > 0.0)) fail(ErrorCode::ZeroNoise, "r0 needs positive noise variances");
  return 0.5 * std::log(var / (2.0 * std::sqrt(t.theta_plus * t.theta_minus)));
}

}  // namespace mdrdf
