#pragma once

#include <cmath>
#include <numbers>

namespace basinlab {

/// x mod 1 into [0,1).
inline double wrap_unit(double x) noexcept {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed circle displacement b - a in [-1/2, 1/2).
inline double circle_delta(double a, double b) noexcept {
  double d = b - a;
  return d - std::floor(d + 0.5);
}

inline double circle_distance(double a, double b) noexcept { return std::fabs(circle_delta(a, b)); }

// sin(2πx) and cos(2πx) with exact argument reduction, so the zeros at the
// dyadic quarter points come out as exact zeros.
inline double sin_2pi(double x) noexcept {
  double r = x - std::nearbyint(x);  // [-1/2, 1/2], exact
  double sign = r < 0.0 ? -1.0 : 1.0;
  double a = std::fabs(r);
  if (a > 0.25) a = 0.5 - a;  // exact (Sterbenz)
  return sign * std::sin(2.0 * std::numbers::pi * a);
}

inline double cos_2pi(double x) noexcept {
  double a = std::fabs(x - std::nearbyint(x));  // [0, 1/2]
  if (a <= 0.25) return std::sin(2.0 * std::numbers::pi * (0.25 - a));
  return -std::sin(2.0 * std::numbers::pi * (a - 0.25));
}

// sin(2πt) for t ∈ [-1/4, 1/4]: odd Taylor polynomial of degree 19, error
// below 1e-15. Evaluated with plain multiplies and adds in a fixed order so
// vector kernels can reproduce it bit for bit.
inline constexpr double kSin2PiCoeffs[10] = {
    6.283185307179586,   -41.34170224039976,  81.60524927607506,    -76.70585975306139,
    42.058693944897655,  -15.09464257682299,  3.819952584848282,    -0.7181223017785006,
    0.10422916220813984, -0.012031585942120627,
};

inline double sin_2pi_kernel(double t) noexcept {
  const double t2 = t * t;
  double p = kSin2PiCoeffs[9];
  for (int k = 8; k >= 0; --k) p = p * t2 + kSin2PiCoeffs[k];
  return p * t;
}

/// cos(2πx) through sin_2pi_kernel; the reduction uses only nearbyint, fabs
/// and one subtraction.
inline double cos_2pi_poly(double x) noexcept {
  const double a = std::fabs(x - std::nearbyint(x));  // [0, 1/2]
  return sin_2pi_kernel(0.25 - a);
}

}  // namespace basinlab
