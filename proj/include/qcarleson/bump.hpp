#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcarleson::bump {

// Smooth step: 0 for v <= 0, 1 for v >= 1, C-infinity in between.
inline double smooth_step(double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / v);
  const double b = std::exp(-1.0 / (1.0 - v));
  return a / (a + b);
}

// 1 on |t| <= 1/2, 0 on |t| >= 1.
inline double eta(double t) { return smooth_step(2.0 * (1.0 - std::abs(t))); }

// eta(t) - eta(2t), supported on 1/4 <= |t| <= 1.
inline double rho(double t) { return eta(t) - eta(2.0 * t); }

inline double psi(double t) {
  if (t == 0.0) return 0.0;
  return rho(t) / t;
}

inline double psi_k(int k, double t) {
  const double s = std::ldexp(1.0, -k);
  return s * psi(s * t);
}

inline double chi(double t) { return smooth_step((0.2 - std::abs(t)) / 0.1); }

inline double chi_s(int s, double t) {
  if (s < 1) throw std::invalid_argument("chi_s: s must be >= 1");
  return chi(std::pow(10.0, s) * t);
}

inline double phi_hat(double xi) {
  return smooth_step((0.25 - std::abs(xi)) / 0.125);
}

struct BumpFamily {
  // the construction is C-infinity
  static constexpr int smoothness_order = std::numeric_limits<int>::max();
  static constexpr double psi_bound = 4.0;

  double psi(double t) const { return bump::psi(t); }
  double chi(double t) const { return bump::chi(t); }
  double phi_hat(double xi) const { return bump::phi_hat(xi); }
};

}  // namespace qcarleson::bump
