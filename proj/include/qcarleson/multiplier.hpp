#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "qcarleson/arithmetic.hpp"
#include "qcarleson/bump.hpp"
#include "qcarleson/fft.hpp"
#include "qcarleson/oscillatory.hpp"
#include "qcarleson/phase.hpp"
#include "qcarleson/util.hpp"

namespace qcarleson {

inline constexpr int kMaxDirectJ = 24;

// A point of the torus written as (A/Q + d_lambda, B/Q + d_beta). Keeping the
// rational part separate lets phases near rational centers be reduced exactly.
struct TorusPoint {
  ReducedRational base{0, 0, 1};
  double d_lambda = 0.0;
  double d_beta = 0.0;

  static TorusPoint at(double lambda, double beta) { return {{0, 0, 1}, lambda, beta}; }
  double lambda() const { return frac(base.lambda() + d_lambda); }
  double beta() const { return frac(base.beta() + d_beta); }
};

namespace detail {

inline void check_direct_j(int j) {
  if (j < 0) throw std::invalid_argument("j must be >= 0");
  if (j > kMaxDirectJ) throw cap_exceeded("direct exponential sums are capped at j <= 24");
}

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t q) {
  return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % q);
}

// signed representative in [-1/2, 1/2) of x/Q0 - y/Q1 + d
inline double rational_offset(std::int64_t x, std::int64_t q0, std::int64_t y, std::int64_t q1, double d) {
  const __int128 den = static_cast<__int128>(q0) * q1;
  __int128 num = static_cast<__int128>(x) * q1 - static_cast<__int128>(y) * q0;
  num %= den;
  if (num < 0) num += den;
  if (2 * num >= den) num -= den;
  return wrap(static_cast<double>(num) / static_cast<double>(den) + d);
}

}  // namespace detail

// M_j = sum_m e(lambda m^2 - beta m) psi_j(m), summed directly.
inline cplx m_j(int j, const TorusPoint& p) {
  detail::check_direct_j(j);
  const std::int64_t lo = std::max<std::int64_t>(1, (std::int64_t{1} << j) / 4);
  const std::int64_t hi = std::int64_t{1} << j;
  const std::int64_t Q = p.base.Q, A = p.base.A, B = p.base.B;
  const double qd = static_cast<double>(Q);
  double re = 0, im = 0;
  for (std::int64_t m = lo; m <= hi; ++m) {
    const double w = bump::psi_k(j, static_cast<double>(m));
    if (w == 0.0) continue;
    const std::int64_t m2 = m * m;
    const double ph_l = frac(static_cast<double>(detail::mulmod(A, m2 % Q, Q)) / qd + frac_mul(p.d_lambda, m2));
    const double ph_b = frac(static_cast<double>(detail::mulmod(B, m % Q, Q)) / qd + frac_mul(p.d_beta, m));
    // e(lambda m^2)(e(-beta m) - e(beta m)) = -2i sin(2 pi beta m) e(lambda m^2)
    const double sb = std::sin(2.0 * std::numbers::pi * ph_b);
    const cplx e = expi(ph_l);
    re += w * sb * e.imag();
    im += -w * sb * e.real();
  }
  return {2.0 * re, 2.0 * im};
}

inline cplx m_j(int j, double lambda, double beta) { return m_j(j, TorusPoint::at(lambda, beta)); }

// M_j(lambda, g/n) for g = 0..n-1 with one DFT.
inline std::vector<cplx> m_j_row(int j, double lambda, std::size_t n) {
  detail::check_direct_j(j);
  if (n == 0) throw std::invalid_argument("m_j_row: n must be >= 1");
  std::vector<cplx> c(n);
  const std::int64_t lo = std::max<std::int64_t>(1, (std::int64_t{1} << j) / 4);
  const std::int64_t hi = std::int64_t{1} << j;
  const auto nn = static_cast<std::int64_t>(n);
  for (std::int64_t m = lo; m <= hi; ++m) {
    const double w = bump::psi_k(j, static_cast<double>(m));
    if (w == 0.0) continue;
    const cplx v = w * expi(frac_mul(lambda, m * m));
    c[m % nn] += v;
    c[((-m) % nn + nn) % nn] -= v;
  }
  Fft::forward(c);
  return c;
}

// Shells R_1..R_s with their Gauss sums, built on first use.
class ShellCache {
 public:
  struct Entry {
    ReducedRational r;
    cplx gauss;
  };

  const std::vector<Entry>& shell(int s) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = shells_.find(s);
    if (it != shells_.end()) return it->second;
    std::vector<Entry> v;
    for (const auto& r : enumerate_shell(s)) v.push_back({r, gauss_sum(r)});
    return shells_.emplace(s, std::move(v)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<int, std::vector<Entry>> shells_;
};

inline ShellCache& default_shells() {
  static ShellCache cache;
  return cache;
}

// number of shells in L_j: s with 1 <= s <= eps j
inline int shell_count(int j, double eps) {
  return static_cast<int>(std::floor(eps * j + 1e-12));
}

// L_{j,s} = sum over R_s of S * H_j(lambda - A/Q, beta - B/Q) chi_s(.) chi_s(.)
inline cplx l_js(int j, int s, const TorusPoint& p, const std::vector<ShellCache::Entry>& shell,
                 double tol = 1e-12) {
  if (s < 1) throw std::invalid_argument("l_js: s must be >= 1");
  const double reach = 0.2 * std::pow(10.0, -s);
  cplx total = 0;
  for (const auto& e : shell) {
    const double dl = detail::rational_offset(p.base.A, p.base.Q, e.r.A, e.r.Q, p.d_lambda);
    if (std::abs(dl) >= reach) continue;
    const double db = detail::rational_offset(p.base.B, p.base.Q, e.r.B, e.r.Q, p.d_beta);
    if (std::abs(db) >= reach) continue;
    const double cut = bump::chi_s(s, dl) * bump::chi_s(s, db);
    if (cut == 0.0 || e.gauss == 0.0) continue;
    total += e.gauss * h_j(j, dl, db, tol) * cut;
  }
  return total;
}

inline cplx l_js(int j, int s, double lambda, double beta, const std::vector<ShellCache::Entry>& shell,
                 double tol = 1e-12) {
  return l_js(j, s, TorusPoint::at(lambda, beta), shell, tol);
}

inline cplx l_j(int j, const TorusPoint& p, double eps, ShellCache& shells = default_shells(),
                double tol = 1e-12) {
  check_epsilon(eps);
  cplx total = 0;
  for (int s = 1; s <= shell_count(j, eps); ++s) total += l_js(j, s, p, shells.shell(s), tol);
  return total;
}

// L^s truncated at J: sum over j <= J with s <= eps j of L_{j,s}
inline cplx l_s(int s, int J, const TorusPoint& p, double eps, ShellCache& shells = default_shells(),
                double tol = 1e-12) {
  check_epsilon(eps);
  cplx total = 0;
  for (int j = 0; j <= J; ++j)
    if (s <= shell_count(j, eps)) total += l_js(j, s, p, shells.shell(s), tol);
  return total;
}

inline cplx e_j(int j, const TorusPoint& p, double eps, ShellCache& shells = default_shells(),
                double tol = 1e-12) {
  check_epsilon(eps);
  return m_j(j, p) - l_j(j, p, eps, shells, tol);
}

inline cplx e_j(int j, double lambda, double beta, double eps) {
  return e_j(j, TorusPoint::at(lambda, beta), eps);
}

// d/dlambda E_j by central differences
inline cplx e_j_dlambda(int j, const TorusPoint& p, double eps, ShellCache& shells = default_shells(),
                        double tol = 1e-12) {
  const double h = std::ldexp(1e-3, -2 * j);
  TorusPoint a = p, b = p;
  a.d_lambda += h;
  b.d_lambda -= h;
  return (e_j(j, a, eps, shells, tol) - e_j(j, b, eps, shells, tol)) / (2.0 * h);
}

// Is the point in some major box of scale j with Q <= qmax?
inline bool in_major_family(int j, double eps, const TorusPoint& p, std::int64_t qmax) {
  const auto probe = MajorBox::make({0, 0, 1}, j, eps);
  for (std::int64_t Q = 1; Q <= qmax; ++Q) {
    // nearest A/Q, B/Q to the point, measured exactly from the base
    const double lam = p.lambda(), bet = p.beta();
    const auto A = static_cast<std::int64_t>(std::llround(lam * Q)) % Q;
    const auto B = static_cast<std::int64_t>(std::llround(bet * Q)) % Q;
    if (std::gcd(std::gcd(A, B), Q) != 1) continue;
    const double dl = detail::rational_offset(p.base.A, p.base.Q, A, Q, p.d_lambda);
    const double db = detail::rational_offset(p.base.B, p.base.Q, B, Q, p.d_beta);
    if (std::abs(dl) <= probe.half_width_lambda && std::abs(db) <= probe.half_width_beta) return true;
  }
  return false;
}

struct FrequencyGrid {
  std::vector<double> lambda_samples;
  std::vector<double> beta_samples;
  std::vector<cplx> values;  // row-major, lambda rows

  cplx& at(std::size_t i, std::size_t k) { return values[i * beta_samples.size() + k]; }
  cplx at(std::size_t i, std::size_t k) const { return values[i * beta_samples.size() + k]; }

  void validate() const {
    auto increasing = [](const std::vector<double>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] < 1.0)) return false;
        if (i && !(v[i] > v[i - 1])) return false;
      }
      return true;
    };
    if (!increasing(lambda_samples) || !increasing(beta_samples))
      throw std::invalid_argument("FrequencyGrid: samples must be strictly increasing in [0,1)");
    if (values.size() != lambda_samples.size() * beta_samples.size())
      throw std::invalid_argument("FrequencyGrid: value matrix does not match the sample lists");
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::invalid_argument("FrequencyGrid: non-finite value");
  }
};

enum class Field { M, L, E };

inline FrequencyGrid sample_grid(int j, double eps, Field field, std::vector<double> lambdas,
                                 std::vector<double> betas, double tol = 1e-12) {
  FrequencyGrid g{std::move(lambdas), std::move(betas), {}};
  g.values.assign(g.lambda_samples.size() * g.beta_samples.size(), cplx{});
  g.validate();
  const std::size_t nb = g.beta_samples.size();
  parallel_for(g.values.size(), [&](std::size_t idx) {
    const auto p = TorusPoint::at(g.lambda_samples[idx / nb], g.beta_samples[idx % nb]);
    switch (field) {
      case Field::M: g.values[idx] = m_j(j, p); break;
      case Field::L: g.values[idx] = l_j(j, p, eps, default_shells(), tol); break;
      case Field::E: g.values[idx] = e_j(j, p, eps, default_shells(), tol); break;
    }
  });
  g.validate();
  return g;
}

struct DecayConfig {
  int j_min = 8;
  int j_max = 18;
  double epsilon = 0.1;
  int grid = 512;             // uniform n x n stratum
  int box_points = 9;         // per axis, over [-2w, 2w] around each sampled center
  int fine_box_points = 25;   // per axis for centers with Q <= fine_q
  int fine_q = 2;
  int max_boxes = 48;         // sampled major-box centers per j
  int derivative_points = 50;
  std::uint64_t seed = 1;
  double tol = 1e-12;
};

struct DecayRow {
  int j = 0;
  double sup_E = 0.0;
  double sup_major_error = 0.0;  // |M_j - S H_j| inside sampled major boxes
  double sup_L_off = 0.0;        // |L_j| off the major boxes
  double derivative_constant = 0.0;  // max |d_lambda E_j| / 2^{2j}
  std::int64_t samples = 0;
  std::int64_t boxes = 0;
  std::int64_t qmax = 0;
};

struct DecayReport {
  DecayConfig config;
  std::vector<DecayRow> rows;
  double slope_E = 0.0;
  double slope_major_error = 0.0;
  double slope_L_off = 0.0;
  double derivative_constant = 0.0;
};

namespace detail {

// major-box centers sampled at scale j: every Q <= 3, the largest Q, and
// seeded random Q, up to max_boxes in total
inline std::vector<ReducedRational> sample_centers(int j, double eps, int max_boxes, Rng& rng) {
  const std::int64_t qmax = major_qmax(j, eps);
  std::vector<ReducedRational> out;
  for (std::int64_t Q = 1; Q <= std::min<std::int64_t>(3, qmax); ++Q)
    for (std::int64_t A = 0; A < Q; ++A)
      for (std::int64_t B = 0; B < Q; ++B)
        if (std::gcd(std::gcd(A, B), Q) == 1) out.push_back({A, B, Q});
  auto random_for = [&](std::int64_t Q) {
    for (;;) {
      const auto A = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(Q)));
      const auto B = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(Q)));
      if (std::gcd(std::gcd(A, B), Q) == 1) return ReducedRational{A, B, Q};
    }
  };
  const std::size_t target = static_cast<std::size_t>(std::max(max_boxes, 0));
  if (qmax > 3)
    for (int i = 0; i < 4 && out.size() < target; ++i) out.push_back(random_for(qmax));
  while (qmax > 3 && out.size() < target) {
    const double lq = std::log(4.0) + rng.uniform() * (std::log(static_cast<double>(qmax)) - std::log(4.0));
    const auto Q = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::exp(lq)), 4, qmax);
    out.push_back(random_for(Q));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline double fit_log2_slope(const std::vector<DecayRow>& rows, double DecayRow::*field) {
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (r.*field > 0.0) {
      x.push_back(r.j);
      y.push_back(std::log2(r.*field));
    }
  if (x.size() < 2) return 0.0;
  return fit_line(x, y).slope;
}

}  // namespace detail

inline DecayRow decay_row(int j, const DecayConfig& cfg, ShellCache& shells = default_shells()) {
  const double eps = cfg.epsilon;
  DecayRow row;
  row.j = j;
  row.qmax = major_qmax(j, eps);
  Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j + 1)));
  const int smax = shell_count(j, eps);
  const auto probe = MajorBox::make({0, 0, 1}, j, eps);
  const double wl = probe.half_width_lambda, wb = probe.half_width_beta;


  // uniform stratum
  const auto n = static_cast<std::size_t>(cfg.grid);
  std::vector<double> row_sup(n, 0.0), row_loff(n, 0.0);
  parallel_for(n, [&](std::size_t g) {
    const double lam = static_cast<double>(g) / static_cast<double>(n);
    const auto Mrow = m_j_row(j, lam, n);
    for (std::size_t h = 0; h < n; ++h) {
      const auto p = TorusPoint::at(lam, static_cast<double>(h) / static_cast<double>(n));
      const cplx L = smax > 0 ? l_j(j, p, eps, shells, cfg.tol) : cplx{};
      row_sup[g] = std::max(row_sup[g], std::abs(Mrow[h] - L));
      if (L != 0.0 && !in_major_family(j, eps, p, row.qmax))
        row_loff[g] = std::max(row_loff[g], std::abs(L));
    }
  });
  for (std::size_t g = 0; g < n; ++g) {
    row.sup_E = std::max(row.sup_E, row_sup[g]);
    row.sup_L_off = std::max(row.sup_L_off, row_loff[g]);
  }
  row.samples += static_cast<std::int64_t>(n * n);

  // box strata: centers of L_j plus sampled major-box centers
  std::vector<ReducedRational> centers;
  for (int s = 1; s <= smax; ++s)
    for (const auto& e : shells.shell(s)) centers.push_back(e.r);
  const auto sampled = detail::sample_centers(j, eps, cfg.max_boxes, rng);
  const std::size_t n_l_centers = centers.size();
  centers.insert(centers.end(), sampled.begin(), sampled.end());
  row.boxes = static_cast<std::int64_t>(sampled.size());

  struct Local {
    double sup_E = 0, sup_major = 0, sup_L_off = 0;
    std::int64_t samples = 0;
  };
  std::vector<Local> local(centers.size());
  parallel_for(centers.size(), [&](std::size_t ci) {
    const auto& c = centers[ci];
    const int m = c.Q <= cfg.fine_q ? cfg.fine_box_points : cfg.box_points;
    const bool major = ci >= n_l_centers;
    const cplx S = gauss_sum(c);
    auto& out = local[ci];
    for (int u = 0; u < m; ++u)
      for (int v = 0; v < m; ++v) {
        const double fu = -2.0 + 4.0 * u / (m - 1), fv = -2.0 + 4.0 * v / (m - 1);
        const TorusPoint p{c, fu * wl, fv * wb};
        const cplx M = m_j(j, p);
        const cplx L = smax > 0 ? l_j(j, p, eps, shells, cfg.tol) : cplx{};
        out.sup_E = std::max(out.sup_E, std::abs(M - L));
        if (L != 0.0 && !in_major_family(j, eps, p, row.qmax))
          out.sup_L_off = std::max(out.sup_L_off, std::abs(L));
        if (major && std::abs(fu) <= 1.0 && std::abs(fv) <= 1.0)
          out.sup_major = std::max(out.sup_major, std::abs(M - S * h_j(j, p.d_lambda, p.d_beta, cfg.tol)));
        ++out.samples;
      }
  });
  for (const auto& l : local) {
    row.sup_E = std::max(row.sup_E, l.sup_E);
    row.sup_major_error = std::max(row.sup_major_error, l.sup_major);
    row.sup_L_off = std::max(row.sup_L_off, l.sup_L_off);
    row.samples += l.samples;
  }

  // derivative probe: half uniform points, half near sampled centers
  std::vector<TorusPoint> dpts;
  for (int i = 0; i < cfg.derivative_points; ++i) {
    if (i % 2 == 0 || centers.empty()) {
      dpts.push_back(TorusPoint::at(rng.uniform(), rng.uniform()));
    } else {
      const auto& c = centers[rng.index(centers.size())];
      dpts.push_back({c, (4.0 * rng.uniform() - 2.0) * wl, (4.0 * rng.uniform() - 2.0) * wb});
    }
  }
  std::vector<double> dval(dpts.size());
  parallel_for(dpts.size(), [&](std::size_t i) {
    dval[i] = std::abs(e_j_dlambda(j, dpts[i], eps, shells, cfg.tol)) / std::ldexp(1.0, 2 * j);
  });
  for (double v : dval) row.derivative_constant = std::max(row.derivative_constant, v);
  return row;
}

inline DecayReport decay_report(const DecayConfig& cfg, ShellCache& shells = default_shells()) {
  if (cfg.j_max < cfg.j_min) throw std::invalid_argument("decay_report: empty j range");
  check_epsilon(cfg.epsilon);
  if (cfg.j_max > kMaxDirectJ) throw cap_exceeded("decay_report: j range beyond the direct-sum cap");
  if (cfg.grid < 1) throw std::invalid_argument("decay_report: grid must be >= 1");
  // box grids span [-2w, 2w]; spacing 4w/(m-1) must not exceed w
  if (cfg.box_points < 5 || cfg.fine_box_points < 5)
    throw std::invalid_argument("decay_report: box grid under-resolves the major boxes");
  DecayReport rep;
  rep.config = cfg;
  for (int j = cfg.j_min; j <= cfg.j_max; ++j) rep.rows.push_back(decay_row(j, cfg, shells));
  rep.slope_E = detail::fit_log2_slope(rep.rows, &DecayRow::sup_E);
  rep.slope_major_error = detail::fit_log2_slope(rep.rows, &DecayRow::sup_major_error);
  rep.slope_L_off = detail::fit_log2_slope(rep.rows, &DecayRow::sup_L_off);
  for (const auto& r : rep.rows) rep.derivative_constant = std::max(rep.derivative_constant, r.derivative_constant);
  return rep;
}

}  // namespace qcarleson
