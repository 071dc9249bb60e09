#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcarleson/bump.hpp"
#include "qcarleson/fft.hpp"
#include "qcarleson/lambda_sets.hpp"
#include "qcarleson/oscillatory.hpp"
#include "qcarleson/phase.hpp"
#include "qcarleson/util.hpp"

namespace qcarleson {

inline constexpr std::int64_t kConvolutionCap = std::int64_t{1} << 24;

// f(origin + i) = samples[i]
struct Signal {
  std::vector<cplx> samples;
  std::int64_t origin = 0;

  void validate() const {
    if (samples.empty()) throw std::invalid_argument("Signal: at least one sample required");
    for (const auto& v : samples)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::invalid_argument("Signal: non-finite sample");
  }
  std::size_t size() const { return samples.size(); }
};

inline double l2_norm(const std::vector<cplx>& v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline double l2_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// taps e(lambda m^2)/m for 1 <= |m| <= R
struct TruncatedKernel {
  double lambda = 0.0;
  std::int64_t R = 1;

  cplx tap(std::int64_t m) const {
    if (m == 0 || m > R || m < -R) return {0.0, 0.0};
    return expi(frac_mul(lambda, m * m)) / static_cast<double>(m);
  }
};

namespace detail {

inline void check_radius(std::int64_t L, std::int64_t R) {
  if (R < 1) throw std::invalid_argument("kernel radius must be >= 1");
  if (L + 2 * R > kConvolutionCap) throw cap_exceeded("convolution length exceeds the cap");
}

// DFT of the kernel laid out cyclically on n points
inline std::vector<cplx> kernel_spectrum(double lambda, std::int64_t R, std::size_t n) {
  const TruncatedKernel k{lambda, R};
  const auto nn = static_cast<std::int64_t>(n);
  std::vector<cplx> buf(n);
  for (std::int64_t m = 1; m <= R; ++m) {
    buf[m % nn] += k.tap(m);
    buf[((-m) % nn + nn) % nn] += k.tap(-m);
  }
  Fft::forward(buf);
  return buf;
}

inline std::vector<cplx> padded_spectrum(const std::vector<cplx>& f, std::size_t n) {
  std::vector<cplx> buf(n);
  std::copy(f.begin(), f.end(), buf.begin());
  Fft::forward(buf);
  return buf;
}

// linear convolution window of length L + 2R out of a cyclic product
inline void convolve_into(const std::vector<cplx>& F, const std::vector<cplx>& K, std::size_t L, std::int64_t R,
                          std::vector<cplx>& work, std::vector<cplx>& out) {
  const std::size_t n = F.size();
  work.resize(n);
  for (std::size_t i = 0; i < n; ++i) work[i] = F[i] * K[i];
  Fft::inverse(work);
  const std::size_t len = L + 2 * static_cast<std::size_t>(R);
  out.resize(len);
  const auto nn = static_cast<std::int64_t>(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < len; ++k) {
    const std::int64_t idx = ((static_cast<std::int64_t>(k) - R) % nn + nn) % nn;
    out[k] = work[static_cast<std::size_t>(idx)] * scale;
  }
}

}  // namespace detail

// Linear convolution with the truncated kernel; output covers positions
// origin - R .. origin + L - 1 + R.
inline Signal apply_kernel(const Signal& f, double lambda, std::int64_t R) {
  f.validate();
  const auto L = static_cast<std::int64_t>(f.size());
  detail::check_radius(L, R);
  const std::size_t n = next_pow2(static_cast<std::size_t>(L + 2 * R));
  const auto F = detail::padded_spectrum(f.samples, n);
  const auto K = detail::kernel_spectrum(lambda, R, n);
  Signal out;
  out.origin = f.origin - R;
  std::vector<cplx> work;
  detail::convolve_into(F, K, f.size(), R, work, out.samples);
  return out;
}

struct MaxSignal {
  std::vector<double> values;
  std::int64_t origin = 0;
};

// Kernel spectra for a fixed set of lambdas, radius and transform size.
class KernelBank {
 public:
  KernelBank(const std::vector<double>& lambdas, std::int64_t R, std::size_t n) : R_(R), n_(n) {
    std::vector<double> distinct = lambdas;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    lambdas_ = distinct;
    spectra_.resize(distinct.size());
    parallel_for(distinct.size(), [&](std::size_t i) { spectra_[i] = detail::kernel_spectrum(distinct[i], R, n); });
  }
  std::size_t size() const { return spectra_.size(); }
  const std::vector<cplx>& spectrum(std::size_t i) const { return spectra_[i]; }
  std::int64_t radius() const { return R_; }
  std::size_t transform_size() const { return n_; }

 private:
  std::int64_t R_;
  std::size_t n_;
  std::vector<double> lambdas_;
  std::vector<std::vector<cplx>> spectra_;
};

inline MaxSignal carleson_max(const Signal& f, const KernelBank& bank) {
  const std::size_t L = f.size();
  const auto R = bank.radius();
  const auto F = detail::padded_spectrum(f.samples, bank.transform_size());
  MaxSignal out;
  out.origin = f.origin - R;
  out.values.assign(L + 2 * static_cast<std::size_t>(R), 0.0);
  std::vector<cplx> work, y;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    detail::convolve_into(F, bank.spectrum(i), L, R, work, y);
    for (std::size_t k = 0; k < y.size(); ++k) out.values[k] = std::max(out.values[k], std::abs(y[k]));
  }
  return out;
}

// sup over lambda in the set of |apply_kernel(f, lambda, R)|
inline MaxSignal carleson_max(const Signal& f, const LambdaSet& set, std::int64_t R) {
  f.validate();
  if (set.size() == 0) throw std::invalid_argument("carleson_max: empty lambda set");
  const auto L = static_cast<std::int64_t>(f.size());
  detail::check_radius(L, R);
  const std::size_t n = next_pow2(static_cast<std::size_t>(L + 2 * R));
  if (static_cast<double>(set.size()) * static_cast<double>(n) > static_cast<double>(kConvolutionCap) * 64.0)
    throw cap_exceeded("carleson_max: |Lambda| times transform size exceeds the cap");
  return carleson_max(f, KernelBank(set.points, R, n));
}

struct NormProbeConfig {
  std::vector<std::int64_t> lengths{256, 512, 1024, 2048, 4096};
  int trials = 200;
  std::uint64_t seed = 1;
  std::int64_t radius_factor = 4;  // R = radius_factor * L
};

struct NormProbeRow {
  std::int64_t length = 0;
  std::int64_t radius = 0;
  double max_ratio = 0.0;
  std::string worst_trial;
  double growth = 0.0;  // max_ratio / previous row's max_ratio
};

struct NormProbeReport {
  NormProbeConfig config;
  std::vector<NormProbeRow> rows;
};

// Trial family of length L: impulse, chirps e(+-lambda n^2) for each lambda,
// then seeded Gaussians, `trials` signals in total.
inline std::vector<std::pair<std::string, Signal>> probe_signals(const LambdaSet& set, std::int64_t L, int trials,
                                                                 Rng& rng) {
  std::vector<std::pair<std::string, Signal>> out;
  auto push = [&](std::string name, std::vector<cplx> s) {
    if (static_cast<int>(out.size()) < trials) out.push_back({std::move(name), Signal{std::move(s), 0}});
  };
  std::vector<cplx> imp(static_cast<std::size_t>(L));
  imp[0] = 1.0;
  push("impulse", imp);
  std::vector<double> distinct = set.points;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (double lam : distinct)
    for (int sgn : {1, -1}) {
      std::vector<cplx> c(static_cast<std::size_t>(L));
      for (std::int64_t n = 0; n < L; ++n) c[n] = expi(sgn * frac_mul(lam, n * n));
      push(std::string(sgn > 0 ? "chirp+" : "chirp-") + std::to_string(lam), std::move(c));
    }
  int g = 0;
  while (static_cast<int>(out.size()) < trials) {
    std::vector<cplx> c(static_cast<std::size_t>(L));
    for (auto& v : c) {
      const double re = rng.normal();
      v = {re, rng.normal()};
    }
    push("gaussian" + std::to_string(g++), std::move(c));
  }
  return out;
}

inline NormProbeReport norm_probe(const LambdaSet& set, const NormProbeConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("norm_probe: trials must be >= 1");
  if (set.size() == 0) throw std::invalid_argument("norm_probe: empty lambda set");
  if (cfg.lengths.empty()) throw std::invalid_argument("norm_probe: no lengths");
  if (cfg.radius_factor < 1) throw std::invalid_argument("norm_probe: radius factor must be >= 1");
  NormProbeReport rep;
  rep.config = cfg;
  Rng rng(cfg.seed);
  for (auto L : cfg.lengths) {
    if (L < 1) throw std::invalid_argument("norm_probe: lengths must be >= 1");
    const std::int64_t R = cfg.radius_factor * L;
    detail::check_radius(L, R);
    const std::size_t n = next_pow2(static_cast<std::size_t>(L + 2 * R));
    const KernelBank bank(set.points, R, n);
    const auto trials = probe_signals(set, L, cfg.trials, rng);
    std::vector<double> ratio(trials.size());
    parallel_for(trials.size(), [&](std::size_t i) {
      const auto& f = trials[i].second;
      ratio[i] = l2_norm(carleson_max(f, bank).values) / l2_norm(f.samples);
    });
    NormProbeRow row;
    row.length = L;
    row.radius = R;
    for (std::size_t i = 0; i < trials.size(); ++i)
      if (ratio[i] > row.max_ratio) {
        row.max_ratio = ratio[i];
        row.worst_trial = trials[i].first;
      }
    row.growth = rep.rows.empty() ? 1.0 : row.max_ratio / rep.rows.back().max_ratio;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- maximal probes on the periodic grid of size G ----

inline void check_grid(std::size_t G) {
  if (G < 4 || (G & (G - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 4");
}

inline void check_separated(const std::vector<double>& theta, double tau) {
  if (theta.empty()) throw std::invalid_argument("theta must be nonempty");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0,1)");
  std::vector<double> t;
  for (double x : theta) t.push_back(frac(x));
  std::sort(t.begin(), t.end());
  for (std::size_t i = 0; i < t.size() && t.size() > 1; ++i) {
    const double gap = i + 1 < t.size() ? t[i + 1] - t[i] : t.front() + 1.0 - t.back();
    if (!(gap > tau)) throw std::invalid_argument("theta points are not tau-separated");
  }
}

// ||sup_i |IDFT(m_i DFT f)| ||_2 / ||f||_2 for every f; make(i, m) fills the
// i-th multiplier sampled at frequencies g/G.
template <class Make>
std::vector<double> torus_maximal_ratios(const std::vector<std::vector<cplx>>& fs, std::size_t count, Make&& make) {
  if (fs.empty()) return {};
  const std::size_t G = fs.front().size();
  std::vector<std::vector<cplx>> F(fs.size());
  std::vector<std::vector<double>> sup(fs.size(), std::vector<double>(G, 0.0));
  for (std::size_t t = 0; t < fs.size(); ++t) {
    if (fs[t].size() != G) throw std::invalid_argument("all signals must share the grid size");
    F[t] = fs[t];
    Fft::forward(F[t]);
  }
  std::vector<cplx> m(G);
  for (std::size_t i = 0; i < count; ++i) {
    std::fill(m.begin(), m.end(), cplx{});
    make(i, m);
    parallel_for(fs.size(), [&](std::size_t t) {
      std::vector<cplx> y(G);
      for (std::size_t g = 0; g < G; ++g) y[g] = m[g] * F[t][g];
      Fft::inverse(y);
      for (std::size_t g = 0; g < G; ++g) sup[t][g] = std::max(sup[t][g], std::abs(y[g]) / static_cast<double>(G));
    });
  }
  std::vector<double> out(fs.size());
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const double nf = l2_norm(fs[t]);
    out[t] = nf == 0.0 ? 0.0 : l2_norm(sup[t]) / nf;
  }
  return out;
}

// frequency offsets g with |wrap(g/G - theta)| < r, as (g, signed distance)
template <class Fn>
void for_each_near(double theta, double r, std::size_t G, Fn&& fn) {
  const double Gd = static_cast<double>(G);
  const auto lo = static_cast<std::int64_t>(std::floor((theta - r) * Gd));
  const auto hi = static_cast<std::int64_t>(std::ceil((theta + r) * Gd));
  const auto nn = static_cast<std::int64_t>(G);
  for (std::int64_t g = lo; g <= hi; ++g) {
    const double d = wrap(static_cast<double>(g) / Gd - theta);
    if (std::abs(d) < r) fn(static_cast<std::size_t>(((g % nn) + nn) % nn), d);
  }
}

// sum_n phihat(lambda (xi - theta_n))
inline void bourgain_multiplier(const std::vector<double>& theta, double lambda, std::vector<cplx>& m) {
  const std::size_t G = m.size();
  for (double th : theta)
    for_each_near(th, 0.25 / lambda, G, [&](std::size_t g, double d) { m[g] += bump::phi_hat(lambda * d); });
}

inline void check_bourgain(const std::vector<double>& theta, double tau, std::size_t G,
                           const std::vector<double>& lambdas) {
  check_grid(G);
  check_separated(theta, tau);
  if (lambdas.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  for (double l : lambdas)
    if (!(l > 1.0 / tau)) throw std::invalid_argument("lambda grid must lie in (1/tau, inf)");
}

inline std::vector<double> bourgain_max_ratios(const std::vector<double>& theta, double tau, std::size_t G,
                                               const std::vector<double>& lambdas,
                                               const std::vector<std::vector<cplx>>& fs) {
  check_bourgain(theta, tau, G, lambdas);
  return torus_maximal_ratios(fs, lambdas.size(),
                              [&](std::size_t i, std::vector<cplx>& m) { bourgain_multiplier(theta, lambdas[i], m); });
}

inline double bourgain_max_probe(const std::vector<double>& theta, double tau, std::size_t G,
                                 const std::vector<double>& lambdas, const std::vector<cplx>& f) {
  if (f.size() != G) throw std::invalid_argument("signal length must equal the grid size");
  return bourgain_max_ratios(theta, tau, G, lambdas, {f}).front();
}

// lo * 2^{i/per_octave} for lo <= lambda <= hi
inline std::vector<double> dyadic_grid(double lo, double hi, int per_octave) {
  if (!(lo > 0.0 && hi >= lo) || per_octave < 1) throw std::invalid_argument("dyadic_grid: bad range");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo * std::exp2(static_cast<double>(i) / per_octave);
    if (v > hi * (1.0 + 1e-12)) break;
    out.push_back(v);
  }
  return out;
}

struct GrowthRow {
  int N = 0;
  double max_ratio = 0.0;
  double ratio_over_log2N = 0.0;  // max_ratio / (log2 N)^2
};

struct GrowthConfig {
  std::vector<int> Ns{2, 4, 8, 16, 32, 64};
  int trials = 100;
  std::uint64_t seed = 1;
  std::size_t grid = std::size_t{1} << 15;
  int per_octave = 8;
  // oscillatory probe only
  int scales = 5;       // k0 .. k0 + scales - 1
  int lambda_octaves = 6;
  double tol = 1e-10;
};

// theta_n = (n + u_n / 2) / N on grid points; gaps exceed tau = 1/(4N)
inline std::vector<double> jittered_frequencies(int N, std::size_t G, Rng& rng) {
  std::vector<double> th;
  const double Gd = static_cast<double>(G);
  for (int n = 0; n < N; ++n) {
    const double x = (n + 0.5 * rng.uniform()) / N;
    th.push_back(std::floor(x * Gd) / Gd);
  }
  return th;
}

// half white Gaussian signals, half with spectrum on the bands |xi - theta_n| < width
inline std::vector<std::vector<cplx>> growth_signals(const std::vector<double>& theta, double width, std::size_t G,
                                                     int trials, Rng& rng) {
  std::vector<std::vector<cplx>> fs;
  for (int t = 0; t < trials; ++t) {
    std::vector<cplx> f(G);
    if (t % 2 == 0) {
      for (auto& v : f) {
        const double re = rng.normal();
        v = {re, rng.normal()};
      }
    } else {
      for (double th : theta)
        for_each_near(th, width, G, [&](std::size_t g, double) {
          const double re = rng.normal();
          f[g] = {re, rng.normal()};
        });
      Fft::inverse(f);
    }
    fs.push_back(std::move(f));
  }
  return fs;
}

inline std::vector<GrowthRow> bourgain_growth(const GrowthConfig& cfg) {
  check_grid(cfg.grid);
  if (cfg.trials < 1) throw std::invalid_argument("bourgain_growth: trials must be >= 1");
  Rng rng(cfg.seed);
  std::vector<GrowthRow> rows;
  for (int N : cfg.Ns) {
    if (N < 1) throw std::invalid_argument("bourgain_growth: N must be >= 1");
    const double tau = 1.0 / (4.0 * N);
    const auto theta = jittered_frequencies(N, cfg.grid, rng);
    const auto lambdas = dyadic_grid(1.0 / tau * std::exp2(1.0 / cfg.per_octave), static_cast<double>(cfg.grid) / 8.0,
                                     cfg.per_octave);
    const auto fs = growth_signals(theta, 0.25 * tau, cfg.grid, cfg.trials, rng);
    const auto r = bourgain_max_ratios(theta, tau, cfg.grid, lambdas, fs);
    GrowthRow row;
    row.N = N;
    row.max_ratio = *std::max_element(r.begin(), r.end());
    const double lg = std::log2(static_cast<double>(N));
    row.ratio_over_log2N = lg > 0 ? row.max_ratio / (lg * lg) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---- oscillatory maximal probe ----

inline void check_oscillatory(const std::vector<double>& theta, double tau, int k0, int k_max, std::size_t G,
                              const std::vector<double>& lambdas) {
  check_grid(G);
  check_separated(theta, tau);
  if (std::ldexp(1.0, k0) * tau < 1.0) throw std::invalid_argument("k0 must satisfy 2^{k0} >= 1/tau");
  if (std::ldexp(1.0, k0) > static_cast<double>(G) / 4.0) throw std::invalid_argument("grid too coarse for k0");
  if (k_max < k0 || std::ldexp(1.0, k_max) > static_cast<double>(G) / 4.0)
    throw std::invalid_argument("k_max must satisfy k0 <= k_max and 2^{k_max} <= G/4");
  if (lambdas.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  for (double l : lambdas)
    if (!(l > 0.0 && l <= tau * tau)) throw std::invalid_argument("lambda grid must lie in (0, tau^2]");
}

// sum_n sum_{k0 <= k <= k_max} H_k(lambda, xi - theta_n) phihat((xi - theta_n)/tau)
inline void oscillatory_multiplier(const std::vector<double>& theta, double tau, int k0, int k_max, double lambda,
                                   double tol, std::vector<cplx>& m) {
  const std::size_t G = m.size();
  const double Gd = static_cast<double>(G);
  auto profile = [&](double d) {
    cplx s = 0;
    for (int k = k0; k <= k_max; ++k) s += h_j(k, lambda, d, tol);
    return s * bump::phi_hat(d / tau);
  };
  const bool on_grid = std::all_of(theta.begin(), theta.end(), [&](double t) { return std::floor(t * Gd) == t * Gd; });
  if (on_grid) {
    const auto r = static_cast<std::int64_t>(std::ceil(0.25 * tau * Gd));
    std::vector<cplx> prof(static_cast<std::size_t>(2 * r + 1));
    for (std::int64_t o = -r; o <= r; ++o) {
      const double d = static_cast<double>(o) / Gd;
      prof[o + r] = std::abs(d) < 0.25 * tau ? profile(d) : cplx{};
    }
    const auto nn = static_cast<std::int64_t>(G);
    for (double th : theta) {
      const auto c = static_cast<std::int64_t>(th * Gd);
      for (std::int64_t o = -r; o <= r; ++o) m[((c + o) % nn + nn) % nn] += prof[o + r];
    }
    return;
  }
  for (double th : theta) for_each_near(th, 0.25 * tau, G, [&](std::size_t g, double d) { m[g] += profile(d); });
}

inline std::vector<double> oscillatory_max_ratios(const std::vector<double>& theta, double tau, int k0, int k_max,
                                                  std::size_t G, const std::vector<double>& lambdas,
                                                  const std::vector<std::vector<cplx>>& fs, double tol = 1e-10) {
  check_oscillatory(theta, tau, k0, k_max, G, lambdas);
  check_tol(tol);
  return torus_maximal_ratios(fs, lambdas.size(), [&](std::size_t i, std::vector<cplx>& m) {
    oscillatory_multiplier(theta, tau, k0, k_max, lambdas[i], tol, m);
  });
}

inline double oscillatory_max_probe(const std::vector<double>& theta, double tau, int k0, int k_max, std::size_t G,
                                    const std::vector<double>& lambdas, const std::vector<cplx>& f,
                                    double tol = 1e-10) {
  if (f.size() != G) throw std::invalid_argument("signal length must equal the grid size");
  return oscillatory_max_ratios(theta, tau, k0, k_max, G, lambdas, {f}, tol).front();
}

inline std::vector<GrowthRow> oscillatory_growth(const GrowthConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("oscillatory_growth: trials must be >= 1");
  if (cfg.scales < 1) throw std::invalid_argument("oscillatory_growth: scales must be >= 1");
  Rng rng(cfg.seed);
  std::vector<GrowthRow> rows;
  for (int N : cfg.Ns) {
    if (N < 1) throw std::invalid_argument("oscillatory_growth: N must be >= 1");
    const double tau = 1.0 / (4.0 * N);
    const int k0 = static_cast<int>(std::ceil(std::log2(1.0 / tau) - 1e-12));
    const int k_max = k0 + cfg.scales - 1;
    const auto G = std::max<std::size_t>(cfg.grid, std::size_t{1} << (k_max + 2));
    const auto theta = jittered_frequencies(N, G, rng);
    const auto lambdas = dyadic_grid(tau * tau * std::exp2(-cfg.lambda_octaves), tau * tau, cfg.per_octave);
    const auto fs = growth_signals(theta, 0.25 * tau, G, cfg.trials, rng);
    const auto r = oscillatory_max_ratios(theta, tau, k0, k_max, G, lambdas, fs, cfg.tol);
    GrowthRow row;
    row.N = N;
    row.max_ratio = *std::max_element(r.begin(), r.end());
    const double lg = std::log2(static_cast<double>(N));
    row.ratio_over_log2N = lg > 0 ? row.max_ratio / (lg * lg) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---- single-scale maximal probe ----

// H_{k(lambda,l)}(lambda, xi) at xi = wrap(g/G); zero when no k exists
inline void single_l_multiplier(int l, double lambda, std::vector<cplx>& m) {
  const std::size_t G = m.size();
  const auto s = ScaleIndex::from(lambda, l);
  if (!s) return;
  if (s->k < 0) throw std::invalid_argument("single-l probe: scale k must be >= 0");
  if (std::ldexp(1.0, s->k) > static_cast<double>(G) / 4.0) throw std::invalid_argument("grid too coarse for the scale");
  const double step = std::ldexp(1.0, s->k) / static_cast<double>(G);
  const OscillatoryTable table(std::ldexp(lambda, 2 * s->k), step, std::ldexp(1.0, s->k - 1));
  const auto half = static_cast<std::int64_t>(G / 2);
  for (std::size_t g = 0; g < G; ++g) {
    const auto gs = static_cast<std::int64_t>(g) < half ? static_cast<std::int64_t>(g)
                                                        : static_cast<std::int64_t>(g) - static_cast<std::int64_t>(G);
    m[g] = table.at(gs);
  }
}

inline std::vector<double> single_l_max_ratios(int l, std::size_t G, const std::vector<double>& lambdas,
                                               const std::vector<std::vector<cplx>>& fs) {
  check_grid(G);
  if (lambdas.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  for (double lam : lambdas)
    if (!(lam > 0.0 && lam <= 1.0)) throw std::invalid_argument("lambda grid must lie in (0,1]");
  return torus_maximal_ratios(fs, lambdas.size(),
                              [&](std::size_t i, std::vector<cplx>& m) { single_l_multiplier(l, lambdas[i], m); });
}

inline double single_l_max_probe(int l, std::size_t G, const std::vector<double>& lambdas, const std::vector<cplx>& f) {
  if (f.size() != G) throw std::invalid_argument("signal length must equal the grid size");
  return single_l_max_ratios(l, G, lambdas, {f}).front();
}

struct SingleLConfig {
  std::vector<int> ls{0, 2, 4, 6, 8, 10, 12};
  int scales = 4;         // k in [l+3, l+3+scales)
  int per_octave = 8;
  int gaussian_trials = 4;
  std::uint64_t seed = 1;
};

struct SingleLRow {
  int l = 0;
  std::size_t grid = 0;
  double max_ratio = 0.0;
};

struct SingleLReport {
  SingleLConfig config;
  std::vector<SingleLRow> rows;
  double slope = 0.0;  // of log2(max_ratio) against l
};

// lambda = 2^{l - 2k + i/per_octave}, k in [l+3, l+3+scales), so that
// every lambda has scale index k at level l
inline std::vector<double> single_l_lambdas(int l, int scales, int per_octave) {
  std::vector<double> out;
  for (int k = l + 3; k < l + 3 + scales; ++k)
    for (int i = 0; i < per_octave; ++i) out.push_back(std::exp2(l - 2 * k + static_cast<double>(i) / per_octave));
  return out;
}

inline SingleLRow single_l_row(int l, const SingleLConfig& cfg) {
  if (l < 0) throw std::invalid_argument("single-l probe: l must be >= 0");
  if (cfg.scales < 1 || cfg.per_octave < 1) throw std::invalid_argument("single-l probe: bad grid refinement");
  const std::size_t G = std::size_t{1} << (l + 3 + cfg.scales - 1 + 2);
  const auto lambdas = single_l_lambdas(l, cfg.scales, cfg.per_octave);
  Rng rng(cfg.seed ^ (0x51ed27ULL * static_cast<std::uint64_t>(l + 1)));
  std::vector<std::vector<cplx>> fs;
  for (int t = 0; t < cfg.gaussian_trials; ++t) {
    std::vector<cplx> f(G);
    for (auto& v : f) {
      const double re = rng.normal();
      v = {re, rng.normal()};
    }
    fs.push_back(std::move(f));
  }
  // band-matched trials: spectrum conj(m)/|m| where |m| >= max|m|/2, one per scale
  for (int k = 0; k < cfg.scales; ++k) {
    std::vector<cplx> m(G);
    single_l_multiplier(l, lambdas[static_cast<std::size_t>(k * cfg.per_octave)], m);
    double mx = 0;
    for (const auto& v : m) mx = std::max(mx, std::abs(v));
    std::vector<cplx> f(G);
    for (std::size_t g = 0; g < G; ++g)
      if (mx > 0 && std::abs(m[g]) >= 0.5 * mx) f[g] = std::conj(m[g]) / std::abs(m[g]);
    Fft::inverse(f);
    fs.push_back(std::move(f));
  }
  const auto r = single_l_max_ratios(l, G, lambdas, fs);
  return {l, G, *std::max_element(r.begin(), r.end())};
}

inline SingleLReport single_l_sweep(const SingleLConfig& cfg) {
  if (cfg.ls.size() < 2) throw std::invalid_argument("single-l sweep: need at least two values of l");
  SingleLReport rep;
  rep.config = cfg;
  std::vector<double> x, y;
  for (int l : cfg.ls) {
    rep.rows.push_back(single_l_row(l, cfg));
    x.push_back(l);
    y.push_back(std::log2(rep.rows.back().max_ratio));
  }
  rep.slope = fit_line(x, y).slope;
  return rep;
}

}  // namespace qcarleson
