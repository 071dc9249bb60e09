#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qcarleson/fft.hpp"
#include "qcarleson/phase.hpp"
#include "qcarleson/util.hpp"

namespace qcarleson {

// (A, B, Q) with 0 <= A, B < Q and gcd(A, B, Q) = 1.
struct ReducedRational {
  std::int64_t A = 0, B = 0, Q = 1;

  static ReducedRational make(std::int64_t A, std::int64_t B, std::int64_t Q) {
    if (Q < 1) throw std::invalid_argument("ReducedRational: Q must be >= 1");
    if (A < 0 || A >= Q || B < 0 || B >= Q)
      throw std::invalid_argument("ReducedRational: A, B must lie in [0, Q)");
    if (std::gcd(std::gcd(A, B), Q) != 1)
      throw std::invalid_argument("ReducedRational: gcd(A, B, Q) must be 1");
    return {A, B, Q};
  }

  // s with 2^{s-1} <= Q < 2^s
  int shell() const {
    int s = 0;
    for (std::int64_t q = Q; q > 0; q >>= 1) ++s;
    return s;
  }

  double lambda() const { return static_cast<double>(A) / static_cast<double>(Q); }
  double beta() const { return static_cast<double>(B) / static_cast<double>(Q); }

  friend bool operator==(const ReducedRational&, const ReducedRational&) = default;
  friend auto operator<=>(const ReducedRational& x, const ReducedRational& y) {
    if (auto c = x.Q <=> y.Q; c != 0) return c;
    if (auto c = x.A <=> y.A; c != 0) return c;
    return x.B <=> y.B;
  }
};

inline constexpr std::int64_t kShellCap = std::int64_t{1} << 16;
inline constexpr std::int64_t kShellElementBudget = std::int64_t{1} << 30;

// All reduced triples with 2^{s-1} <= Q < 2^s in (Q, A, B) order.
inline std::vector<ReducedRational> enumerate_shell(int s, std::int64_t cap = kShellCap) {
  if (s < 1) throw std::invalid_argument("enumerate_shell: s must be >= 1");
  if (s > 62 || (std::int64_t{1} << s) > cap)
    throw cap_exceeded("enumerate_shell: 2^s exceeds the configured cap");
  const std::int64_t lo = std::int64_t{1} << (s - 1), hi = std::int64_t{1} << s;
  long double total = 0;
  for (std::int64_t q = lo; q < hi; ++q) total += static_cast<long double>(q) * q;
  if (total > static_cast<long double>(kShellElementBudget))
    throw cap_exceeded("enumerate_shell: shell too large to materialize");
  std::vector<ReducedRational> out;
  for (std::int64_t Q = lo; Q < hi; ++Q)
    for (std::int64_t A = 0; A < Q; ++A) {
      const std::int64_t g = std::gcd(A, Q);
      for (std::int64_t B = 0; B < Q; ++B)
        if (std::gcd(g, B) == 1) out.push_back({A, B, Q});
    }
  return out;
}

// e(k/Q) for k = 0..Q-1
inline std::vector<cplx> roots_of_unity(std::int64_t Q) {
  std::vector<cplx> w(static_cast<std::size_t>(Q));
  for (std::int64_t k = 0; k < Q; ++k) w[k] = expi(static_cast<double>(k) / static_cast<double>(Q));
  return w;
}

// (1/Q) sum_{r<Q} e((A r^2 - B r)/Q), phases reduced exactly in integers.
inline cplx gauss_sum(std::int64_t A, std::int64_t B, std::int64_t Q) {
  if (Q < 1) throw std::invalid_argument("gauss_sum: Q must be >= 1");
  const auto w = roots_of_unity(Q);
  const std::int64_t a = ((A % Q) + Q) % Q, b = ((B % Q) + Q) % Q;
  cplx s = 0;
  for (std::int64_t r = 0; r < Q; ++r) {
    const auto r2 = static_cast<std::int64_t>((static_cast<__int128>(r) * r) % Q);
    const auto k = static_cast<std::int64_t>(
        ((static_cast<__int128>(a) * r2 - static_cast<__int128>(b) * r) % Q + Q) % Q);
    s += w[k];
  }
  return s / static_cast<double>(Q);
}

inline cplx gauss_sum(const ReducedRational& r) { return gauss_sum(r.A, r.B, r.Q); }

// S(A, B, Q) for every B in [0, Q) with one DFT.
inline std::vector<cplx> gauss_sums_over_b(std::int64_t A, std::int64_t Q,
                                           const std::vector<cplx>* roots = nullptr) {
  std::vector<cplx> local;
  if (!roots) {
    local = roots_of_unity(Q);
    roots = &local;
  }
  std::vector<cplx> x(static_cast<std::size_t>(Q));
  for (std::int64_t r = 0; r < Q; ++r) {
    const auto k = static_cast<std::int64_t>((static_cast<__int128>(A) * ((r * r) % Q)) % Q);
    x[r] = (*roots)[k];
  }
  Fft::forward(x);
  for (auto& v : x) v /= static_cast<double>(Q);
  return x;
}

struct ModulusLawReport {
  double max_deviation = 0.0;
  std::int64_t triples = 0;
  ReducedRational worst{};
};

// max | |S| - Q^{-1/2} | over odd Q <= qmax, gcd(A,Q) = 1, all B.
inline ModulusLawReport gauss_modulus_law(std::int64_t qmax) {
  std::vector<ModulusLawReport> per(static_cast<std::size_t>(qmax + 1));
  parallel_for(static_cast<std::size_t>(qmax + 1), [&](std::size_t qi) {
    const auto Q = static_cast<std::int64_t>(qi);
    if (Q < 1 || Q % 2 == 0) return;
    const auto roots = roots_of_unity(Q);
    const double target = 1.0 / std::sqrt(static_cast<double>(Q));
    auto& rep = per[qi];
    for (std::int64_t A = 0; A < Q; ++A) {
      if (std::gcd(A, Q) != 1) continue;
      const auto s = gauss_sums_over_b(A, Q, &roots);
      for (std::int64_t B = 0; B < Q; ++B) {
        const double dev = std::abs(std::abs(s[B]) - target);
        ++rep.triples;
        if (dev > rep.max_deviation) {
          rep.max_deviation = dev;
          rep.worst = {A, B, Q};
        }
      }
    }
  });
  ModulusLawReport out;
  for (const auto& r : per) {
    out.triples += r.triples;
    if (r.max_deviation > out.max_deviation) {
      out.max_deviation = r.max_deviation;
      out.worst = r.worst;
    }
  }
  return out;
}

struct GaussDecayReport {
  double sup = 0.0;  // max |S| Q^nu
  ReducedRational argmax{};
  std::int64_t orbit_representatives = 0;
};

// max over reduced (A,B,Q), Q <= qmax, of |S(A,B,Q)| Q^nu. With use_orbits,
// one A per orbit under multiplication by squares of units is evaluated,
// since S(A u^2, B u, Q) = S(A, B, Q) and gcd(A u^2, B u, Q) = gcd(A, B, Q).
inline GaussDecayReport gauss_decay_sup(std::int64_t qmax, double nu, bool use_orbits = true) {
  std::vector<GaussDecayReport> per(static_cast<std::size_t>(qmax + 1));
  parallel_for(static_cast<std::size_t>(qmax + 1), [&](std::size_t qi) {
    const auto Q = static_cast<std::int64_t>(qi);
    if (Q < 1) return;
    const auto roots = roots_of_unity(Q);
    std::vector<std::int64_t> squares;
    if (use_orbits) {
      std::vector<char> seen(static_cast<std::size_t>(Q), 0);
      for (std::int64_t u = 1; u <= Q; ++u)
        if (std::gcd(u, Q) == 1) {
          const std::int64_t s = (u * u) % Q;
          if (!seen[s]) {
            seen[s] = 1;
            squares.push_back(s);
          }
        }
    }
    std::vector<char> done(static_cast<std::size_t>(Q), 0);
    const double scale = std::pow(static_cast<double>(Q), nu);
    auto& rep = per[qi];
    for (std::int64_t A = 0; A < Q; ++A) {
      if (done[A]) continue;
      if (use_orbits)
        for (auto s : squares) done[(A * s) % Q] = 1;
      ++rep.orbit_representatives;
      const auto sums = gauss_sums_over_b(A, Q, &roots);
      const std::int64_t g = std::gcd(A, Q);
      for (std::int64_t B = 0; B < Q; ++B) {
        if (std::gcd(g, B) != 1) continue;
        const double v = std::abs(sums[B]) * scale;
        if (v > rep.sup) {
          rep.sup = v;
          rep.argmax = {A, B, Q};
        }
      }
    }
  });
  GaussDecayReport out;
  for (const auto& r : per) {
    out.orbit_representatives += r.orbit_representatives;
    if (r.sup > out.sup) {
      out.sup = r.sup;
      out.argmax = r.argmax;
    }
  }
  return out;
}

inline void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0 / 7.0))
    throw std::invalid_argument("epsilon must lie in (0, 1/7)");
}

struct MajorBox {
  ReducedRational center;
  int j = 0;
  double epsilon = 0.1;
  double half_width_lambda = 0.0;  // 2^{(eps-2)j}
  double half_width_beta = 0.0;    // 2^{(eps-1)j}

  static MajorBox make(const ReducedRational& c, int j, double eps) {
    check_epsilon(eps);
    if (j < 0) throw std::invalid_argument("MajorBox: j must be >= 0");
    return {c, j, eps, std::exp2((eps - 2.0) * j), std::exp2((eps - 1.0) * j)};
  }

  bool contains(double lambda, double beta) const {
    return torus_dist(lambda, center.lambda()) <= half_width_lambda &&
           torus_dist(beta, center.beta()) <= half_width_beta;
  }
};

inline bool in_major_box(int j, double eps, double lambda, double beta, const ReducedRational& c) {
  return MajorBox::make(c, j, eps).contains(lambda, beta);
}

// largest Q of the major-box family at scale j: floor(2^{6 eps j})
inline std::int64_t major_qmax(int j, double eps) {
  return static_cast<std::int64_t>(std::floor(std::exp2(6.0 * eps * j) + 1e-9));
}

struct OverlapReport {
  std::int64_t boxes = 0;
  std::int64_t overlapping_pairs = 0;
  double min_beta_separation = std::numeric_limits<double>::infinity();   // same lambda center
  double min_lambda_separation = std::numeric_limits<double>::infinity(); // distinct lambda centers
  double twice_width_lambda = 0.0;
  double twice_width_beta = 0.0;
};

namespace detail {

// beta centers B/Q of the triples whose lambda center reduces to a/q
inline std::vector<double> beta_centers(std::int64_t a, std::int64_t q, std::int64_t qmax) {
  (void)a;
  std::vector<double> out;
  for (std::int64_t m = 1; q * m <= qmax; ++m) {
    const std::int64_t Q = q * m;
    for (std::int64_t B = 0; B < Q; ++B)
      if (std::gcd(B, m) == 1) out.push_back(static_cast<double>(B) / static_cast<double>(Q));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// pairs (x in xs, y in ys) with torus distance <= w; xs, ys sorted in [0,1)
inline std::int64_t cross_pairs(const std::vector<double>& xs, const std::vector<double>& ys, double w) {
  std::int64_t n = 0;
  for (double x : xs)
    for (double shift : {-1.0, 0.0, 1.0}) {
      const auto lo = std::lower_bound(ys.begin(), ys.end(), x - w + shift);
      const auto hi = std::upper_bound(ys.begin(), ys.end(), x + w + shift);
      n += hi - lo;
    }
  return n;
}

}  // namespace detail

// Counts pairs of closed major boxes at scale j with Q <= qmax that
// intersect on the torus.
inline OverlapReport count_box_overlaps(int j, double eps, std::int64_t qmax) {
  check_epsilon(eps);
  if (qmax < 1) throw std::invalid_argument("count_box_overlaps: qmax must be >= 1");
  OverlapReport rep;
  const auto probe = MajorBox::make({0, 0, 1}, j, eps);
  const double wl = 2.0 * probe.half_width_lambda, wb = 2.0 * probe.half_width_beta;
  if (wb >= 0.5)
    throw std::invalid_argument("count_box_overlaps: boxes wider than half the torus (j too small)");
  rep.twice_width_lambda = wl;
  rep.twice_width_beta = wb;

  struct Frac {
    std::int64_t a, q;
  };
  std::vector<Frac> lams;
  for (std::int64_t q = 1; q <= qmax; ++q)
    for (std::int64_t a = 0; a < q; ++a)
      if (std::gcd(a, q) == 1) lams.push_back({a, q});
  std::sort(lams.begin(), lams.end(), [](const Frac& x, const Frac& y) {
    return static_cast<__int128>(x.a) * y.q < static_cast<__int128>(y.a) * x.q;
  });
  const std::size_t n = lams.size();
  auto val = [&](std::size_t i) { return static_cast<double>(lams[i].a) / static_cast<double>(lams[i].q); };

  // neighbouring lambda centers closer than the box width
  std::vector<std::pair<std::size_t, std::size_t>> near;
  for (std::size_t i = 0; i < n && n > 1; ++i) {
    for (std::size_t step = 1; step < n; ++step) {
      const std::size_t k = (i + step) % n;
      // forward arc, so each unordered pair is met once (widths are < 1/2)
      const double d = frac(val(k) - val(i));
      if (step == 1) rep.min_lambda_separation = std::min(rep.min_lambda_separation, d);
      if (d > wl) break;
      near.emplace_back(i, k);
    }
  }

  std::vector<std::int64_t> same(n, 0);
  std::vector<double> minsep(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> sizes(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const auto b = detail::beta_centers(lams[i].a, lams[i].q, qmax);
    sizes[i] = static_cast<std::int64_t>(b.size());
    const std::size_t m = b.size();
    std::int64_t pairs = 0;
    std::size_t r = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (r < k + 1) r = k + 1;
      auto ext = [&](std::size_t idx) { return idx < m ? b[idx] : b[idx - m] + 1.0; };
      while (r < k + m && ext(r) - b[k] <= wb) ++r;
      pairs += static_cast<std::int64_t>(r - k - 1);
      if (m > 1) minsep[i] = std::min(minsep[i], ext(k + 1) - b[k]);
    }
    same[i] = pairs;
  });
  for (std::size_t i = 0; i < n; ++i) {
    rep.boxes += sizes[i];
    rep.overlapping_pairs += same[i];
    rep.min_beta_separation = std::min(rep.min_beta_separation, minsep[i]);
  }
  for (const auto& [i, k] : near) {
    const auto bi = detail::beta_centers(lams[i].a, lams[i].q, qmax);
    const auto bk = detail::beta_centers(lams[k].a, lams[k].q, qmax);
    rep.overlapping_pairs += detail::cross_pairs(bi, bk, wb);
  }
  return rep;
}

}  // namespace qcarleson
