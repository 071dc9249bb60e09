#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace qcarleson {

using cplx = std::complex<double>;

// x - floor(x), exact for finite doubles.
inline double frac(double x) { return x - std::floor(x); }

// Fractional part of x*n for |n| < 2^53, using an error-free product so
// the phase keeps full precision even when x*n is large.
inline double frac_mul(double x, std::int64_t n) {
  x = frac(x);
  const double nd = static_cast<double>(n);
  const double p = x * nd;
  const double e = std::fma(x, nd, -p);
  return frac(frac(p) + e);
}

// e(t) = exp(2 pi i t), exact at multiples of 1/4
inline cplx expi(double t) {
  t -= std::nearbyint(t);
  const double a = std::abs(t);
  if (a == 0.5) return {-1.0, 0.0};
  if (a == 0.25) return {0.0, std::copysign(1.0, t)};
  const double th = 2.0 * std::numbers::pi * t;
  return {std::cos(th), std::sin(th)};
}

// Signed representative of x modulo 1 in [-1/2, 1/2).
inline double wrap(double x) {
  double r = x - std::floor(x + 0.5);
  return r;
}

inline double torus_dist(double a, double b) { return std::abs(wrap(a - b)); }

}  // namespace qcarleson
