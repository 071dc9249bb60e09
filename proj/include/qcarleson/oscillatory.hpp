#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qcarleson/bump.hpp"
#include "qcarleson/fft.hpp"
#include "qcarleson/phase.hpp"
#include "qcarleson/util.hpp"

namespace qcarleson {

// ||(x,y)||_j = 2^{2j}|x| + 2^j|y|
struct OscNorm {
  int j = 0;
  double operator()(double x, double y) const {
    return std::ldexp(std::abs(x), 2 * j) + std::ldexp(std::abs(y), j);
  }
};

namespace detail {

inline constexpr double kPsiHatStep = 0.125;
inline constexpr int kPsiHatHalf = 4096;  // covers |w| <= 512
inline constexpr double kPsiHatReach = kPsiHatStep * kPsiHatHalf;

// psihat(w) at w = n/8, |n| <= 4096. psi is odd and real, so psihat is odd
// and purely imaginary; the imaginary part is stored.
inline const std::vector<double>& psi_hat_table() {
  static const std::vector<double> table = [] {
    const double period = 1.0 / kPsiHatStep;
    const std::size_t n = 16384;
    const double du = period / static_cast<double>(n);
    std::vector<cplx> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long k = static_cast<long>(i) < static_cast<long>(n / 2)
                         ? static_cast<long>(i)
                         : static_cast<long>(i) - static_cast<long>(n);
      buf[i] = bump::psi(static_cast<double>(k) * du);
    }
    Fft::forward(buf);
    std::vector<double> out(2 * kPsiHatHalf + 1);
    for (int m = -kPsiHatHalf; m <= kPsiHatHalf; ++m) {
      const std::size_t idx = static_cast<std::size_t>((m + static_cast<long>(n)) % static_cast<long>(n));
      out[m + kPsiHatHalf] = du * buf[idx].imag();
    }
    out[kPsiHatHalf] = 0.0;
    return out;
  }();
  return table;
}

// -2i * sum over panels of psi(u) e(a u^2) sin(2 pi b u) on [1/4, 1].
inline cplx panel_sum(double a, double b, std::int64_t panels, double* abs_sum) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const double lo = 0.25, width = 0.75 / static_cast<double>(panels);
  double re = 0, im = 0, mag = 0;
  for (std::int64_t p = 0; p < panels; ++p) {
    const double c = lo + (static_cast<double>(p) + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        if (sgn < 0 && xs[i] == 0.0) continue;
        const double u = c + sgn * half * xs[i];
        const double w = half * ws[i] * bump::psi(u) *
                         std::sin(2.0 * std::numbers::pi * frac(b * u));
        const cplx e = expi(a * u * u);
        re += w * e.real();
        im += w * e.imag();
        mag += std::abs(w);
      }
    }
  }
  if (abs_sum) *abs_sum = 2.0 * mag;
  // -2i (re + i im) = 2 im - 2i re
  return {2.0 * im, -2.0 * re};
}

inline cplx panel_route(double a, double b, double tol) {
  std::int64_t n = std::max<std::int64_t>(
      16, static_cast<std::int64_t>(std::ceil(4.0 * (std::abs(a) + std::abs(b)))));
  double mag = 0;
  cplx coarse = panel_sum(a, b, n, &mag);
  for (;;) {
    if (n > (std::int64_t{1} << 28))
      throw cap_exceeded("oscillatory integral: panel refinement did not converge");
    cplx fine = panel_sum(a, b, 2 * n, &mag);
    if (std::abs(fine - coarse) <= std::max(tol, 16.0 * DBL_EPSILON * mag)) return fine;
    coarse = fine;
    n *= 2;
  }
}

// H(a,b) = e^{i pi/4 sgn a} / sqrt(2|a|) * int psihat(w) e(-(b-w)^2/(4a)) dw
inline cplx dual_route(double a, double b) {
  const auto& t = psi_hat_table();
  double re = 0, im = 0;
  const double inv4a = 1.0 / (4.0 * a);
  for (int m = -kPsiHatHalf; m <= kPsiHatHalf; ++m) {
    const double v = t[m + kPsiHatHalf];
    if (v == 0.0) continue;
    const double c = b - m * kPsiHatStep;
    const cplx e = expi(-(c * c) * inv4a);
    // psihat = i v
    re += -v * e.imag();
    im += v * e.real();
  }
  const double s = kPsiHatStep / std::sqrt(2.0 * std::abs(a));
  const cplx pre = std::polar(1.0, (a > 0 ? 0.25 : -0.25) * std::numbers::pi);
  return pre * cplx(re * s, im * s);
}

inline bool dual_route_applies(double a, double b) {
  const double aa = std::abs(a);
  return aa >= 64.0 && 14.0 * aa >= std::abs(b) + 700.0;
}

}  // namespace detail

// int e(a u^2 - b u) psi(u) du over 1/4 <= |u| <= 1
inline cplx oscillatory_integral(double a, double b, double tol = 1e-12) {
  // psi is odd and e(a u^2) even, so the b = 0 integral vanishes for every a
  if (b == 0.0) return {0.0, 0.0};
  if (detail::dual_route_applies(a, b)) return detail::dual_route(a, b);
  return detail::panel_route(a, b, tol);
}

inline void check_tol(double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-6))
    throw std::invalid_argument("tolerance must lie in [1e-14, 1e-6]");
}

// H_j(x,y) = int e(x t^2 - y t) psi_j(t) dt
inline cplx h_j(int j, double x, double y, double tol = 1e-12) {
  if (j < 0) throw std::invalid_argument("h_j: j must be >= 0");
  check_tol(tol);
  return oscillatory_integral(std::ldexp(x, 2 * j), std::ldexp(y, j), tol);
}

// Scale k with 1 <= lambda 2^{2k-l} < 2, when the parity of l allows one.
struct ScaleIndex {
  int l = 0;
  double lambda = 0.0;
  int k = 0;
  int k_l = 0;

  static std::optional<ScaleIndex> from(double lambda, int l) {
    if (!(lambda > 0.0 && lambda <= 1.0))
      throw std::invalid_argument("ScaleIndex: lambda must lie in (0,1]");
    int e = 0;
    std::frexp(lambda, &e);  // lambda = m 2^e, m in [1/2, 1)
    const int n = 1 - e;     // lambda 2^n in [1, 2)
    if (((n + l) % 2 + 2) % 2 != 0) return std::nullopt;
    ScaleIndex s;
    s.l = l;
    s.lambda = lambda;
    s.k = (n + l) / 2;
    s.k_l = l <= 0 ? s.k : s.k - l;
    return s;
  }
};

// zero Fourier mode of the scale-k piece
inline cplx mu(const ScaleIndex& s, double tol = 1e-12) { return h_j(s.k, s.lambda, 0.0, tol); }

inline cplx phi_kl_hat(const ScaleIndex& s, double xi, double tol = 1e-12) {
  return h_j(s.k, s.lambda, xi, tol) - mu(s, tol) * bump::phi_hat(std::ldexp(xi, s.k_l));
}

// 2^{-2k} d/dlambda of phi_kl_hat by central differences in a = lambda 4^k.
inline cplx phi_kl_hat_dlambda(const ScaleIndex& s, double xi, double tol = 1e-12) {
  const double a = std::ldexp(s.lambda, 2 * s.k);
  const double b = std::ldexp(xi, s.k);
  const double h = 1e-4 * std::max(1.0, std::abs(a));
  const double cut = bump::phi_hat(std::ldexp(xi, s.k_l));
  auto f = [&](double aa) {
    return oscillatory_integral(aa, b, tol) - oscillatory_integral(aa, 0.0, tol) * cut;
  };
  return (f(a + h) - f(a - h)) / (2.0 * h);
}

struct EnvelopeReport {
  double constant = 0.0;
  std::size_t samples = 0;
  double worst_x = 0.0, worst_y = 0.0;
};

// max |H_j| / min{n, n^{-1/2}} with n = ||(x,y)||_j
inline EnvelopeReport envelope_check(int j, const std::vector<std::pair<double, double>>& samples,
                                     double tol = 1e-12) {
  if (samples.empty()) throw std::invalid_argument("envelope_check: empty sample list");
  const OscNorm norm{j};
  std::vector<double> ratio(samples.size());
  for (const auto& [x, y] : samples)
    if (norm(x, y) == 0.0)
      throw std::invalid_argument("envelope_check: (0,0) has no envelope ratio");
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto [x, y] = samples[i];
    const double n = norm(x, y);
    ratio[i] = std::abs(h_j(j, x, y, tol)) / std::min(n, 1.0 / std::sqrt(n));
  });
  EnvelopeReport r;
  r.samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (ratio[i] > r.constant) {
      r.constant = ratio[i];
      r.worst_x = samples[i].first;
      r.worst_y = samples[i].second;
    }
  return r;
}

// H(a, n * b_step) for all n at once, for a fixed a. Values with
// |b| > 2|a| + 1024 lie below double precision and are returned as 0.
class OscillatoryTable {
 public:
  OscillatoryTable(double a, double b_step, double b_max) : a_(a), step_(b_step) {
    if (!(b_step > 0.0 && b_step <= 0.25))
      throw std::invalid_argument("OscillatoryTable: b_step must lie in (0, 1/4]");
    if (!(b_max >= 0.0)) throw std::invalid_argument("OscillatoryTable: b_max must be >= 0");
    limit_ = std::min(b_max, 2.0 * std::abs(a) + 1024.0);
    const double period = 1.0 / b_step;
    const double band = limit_ + 2.0 * std::abs(a) + 1024.0;
    n_ = next_pow2(static_cast<std::size_t>(std::ceil(period * band)));
    if (n_ > (std::size_t{1} << 26)) throw cap_exceeded("OscillatoryTable: grid too large");
    const double du = period / static_cast<double>(n_);
    data_.assign(n_, cplx{});
    const long half = static_cast<long>(n_ / 2);
    for (std::size_t i = 0; i < n_; ++i) {
      const long k = static_cast<long>(i) < half ? static_cast<long>(i)
                                                 : static_cast<long>(i) - static_cast<long>(n_);
      const double u = static_cast<double>(k) * du;
      if (std::abs(u) < 0.25 || std::abs(u) > 1.0) continue;
      data_[i] = bump::psi(u) * expi(a * u * u);
    }
    Fft::forward(data_);
    for (auto& v : data_) v *= du;
  }

  double a() const { return a_; }
  double step() const { return step_; }

  // value at b = n * step
  cplx at(std::int64_t n) const {
    if (std::abs(static_cast<double>(n) * step_) > limit_) return {0.0, 0.0};
    const std::int64_t m = static_cast<std::int64_t>(n_);
    return data_[static_cast<std::size_t>(((n % m) + m) % m)];
  }

 private:
  double a_, step_, limit_ = 0.0;
  std::size_t n_ = 0;
  std::vector<cplx> data_;
};

}  // namespace qcarleson
