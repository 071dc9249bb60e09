#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcarleson/util.hpp"

namespace qcarleson {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

struct CantorProvenance {
  int D = 2;
  int depth = 1;
};

// Finite modulation set. `exact` holds the points as rationals, sorted and
// distinct; `points` are their nearest doubles.
struct LambdaSet {
  std::vector<double> points;
  std::vector<cpp_rational> exact;
  std::optional<CantorProvenance> cantor;  // empty for explicit sets

  static LambdaSet explicit_set(std::vector<cpp_rational> pts) {
    for (const auto& p : pts)
      if (p < 0 || p > 1) throw std::invalid_argument("LambdaSet: points must lie in [0,1]");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    LambdaSet s;
    s.exact = std::move(pts);
    for (const auto& p : s.exact) s.points.push_back(p.convert_to<double>());
    return s;
  }

  // each double is taken at its exact binary value
  static LambdaSet from_doubles(const std::vector<double>& xs) {
    std::vector<cpp_rational> pts;
    for (double x : xs) {
      if (!std::isfinite(x)) throw std::invalid_argument("LambdaSet: non-finite point");
      pts.emplace_back(x);
    }
    return explicit_set(std::move(pts));
  }

  std::size_t size() const { return exact.size(); }
};

inline constexpr std::size_t kCantorPointCap = std::size_t{1} << 20;
inline constexpr std::int64_t kCantorBitCap = std::int64_t{1} << 16;

inline std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / b) return std::numeric_limits<std::int64_t>::max();
    r *= b;
  }
  return r;
}

// 2^{-e} exactly
inline cpp_rational pow2_neg(std::int64_t e) {
  cpp_int den = 1;
  den <<= static_cast<unsigned>(e);
  return cpp_rational(cpp_int(1), den);
}

// sums of 2^{-D^j} over J in {1..depth}; mask bit for j = 1 is the most
// significant, so mask order is increasing order
inline LambdaSet cantor_set(int D, int depth, std::size_t cap = kCantorPointCap) {
  if (D < 2) throw std::invalid_argument("cantor_set: D must be >= 2");
  if (depth < 1) throw std::invalid_argument("cantor_set: depth must be >= 1");
  if (depth >= 63 || (std::size_t{1} << depth) > cap)
    throw cap_exceeded("cantor_set: 2^depth exceeds the point cap");
  if (ipow(D, depth) > kCantorBitCap) throw cap_exceeded("cantor_set: denominators exceed the bit cap");
  std::vector<cpp_rational> terms;
  for (int j = 1; j <= depth; ++j) terms.push_back(pow2_neg(ipow(D, j)));
  const std::size_t n = std::size_t{1} << depth;
  LambdaSet s;
  s.exact.reserve(n);
  for (std::size_t mask = 0; mask < n; ++mask) {
    cpp_rational v = 0;
    for (int j = 1; j <= depth; ++j)
      if (mask >> (depth - j) & 1) v += terms[j - 1];
    s.exact.push_back(v);
  }
  for (const auto& p : s.exact) s.points.push_back(p.convert_to<double>());
  s.cantor = CantorProvenance{D, depth};
  return s;
}

struct CoverInterval {
  cpp_int num, den;  // center num/den in lowest terms
  double center = 0.0;
  double half_width = 0.0;
  cpp_rational center_exact() const { return cpp_rational(num, den); }
};

struct CoveringCertificate {
  double t = 0.0;
  std::vector<CoverInterval> intervals;
  double C_lambda = 0.0;
  double d = 0.0;
  int level = -1;  // truncation level for Cantor sets, -1 for explicit sets
  std::size_t N() const { return intervals.size(); }
};

struct uncoverable : std::runtime_error {
  double witness;
  uncoverable(const std::string& msg, double w) : std::runtime_error(msg), witness(w) {}
};

// log2 of a positive integer
inline double log2_int(const cpp_int& q) {
  if (q <= 0) throw std::invalid_argument("log2_int: positive argument required");
  const auto bits = static_cast<std::int64_t>(boost::multiprecision::msb(q));
  if (bits < 52) return std::log2(q.convert_to<double>());
  const cpp_int top = q >> static_cast<unsigned>(bits - 52);
  return static_cast<double>(bits - 52) + std::log2(top.convert_to<double>());
}

struct CertificateCheck {
  bool ok = true;
  bool count_bound_ok = true;  // N <= C t^{-2d}
  std::string reason;
};

// Independent re-check: every point in an interval, every denominator
// within C t^{-d}, every half-width at most t/2.
inline CertificateCheck verify_certificate(const LambdaSet& set, const CoveringCertificate& c) {
  CertificateCheck r;
  auto fail = [&](std::string why) {
    if (r.ok) r.reason = std::move(why);
    r.ok = false;
  };
  if (!(c.t > 0.0 && c.t < 1.0)) fail("t outside (0,1)");
  if (!(c.C_lambda > 0.0)) fail("C_lambda must be positive");
  if (!(c.d > 0.0 && c.d <= 1.0)) fail("d outside (0,1]");
  if (c.intervals.empty() && set.size() > 0) fail("no intervals");
  if (!r.ok) return r;
  const cpp_rational t_exact(c.t);
  struct Iv {
    cpp_rational c, h;
  };
  std::vector<Iv> ivs;
  for (const auto& iv : c.intervals) {
    if (iv.den <= 0) {
      fail("non-positive denominator");
      return r;
    }
    const cpp_rational h(iv.half_width);
    if (h * 2 > t_exact) fail("half-width exceeds t/2");
    const double lhs = log2_int(iv.den);
    const double rhs = std::log2(c.C_lambda) - c.d * std::log2(c.t);
    if (lhs > rhs + 1e-9) fail("denominator " + iv.den.str() + " exceeds C t^{-d}");
    ivs.push_back({iv.center_exact(), h});
  }
  std::sort(ivs.begin(), ivs.end(), [](const Iv& a, const Iv& b) { return a.c < b.c; });
  for (std::size_t i = 0; i < set.exact.size(); ++i) {
    const auto& p = set.exact[i];
    auto it = std::lower_bound(ivs.begin(), ivs.end(), p, [](const Iv& a, const cpp_rational& v) { return a.c < v; });
    bool hit = false;
    // intervals may differ in width; scan outward while a hit is possible
    for (auto k = it; k != ivs.end() && !hit; ++k) {
      if (k->c - p <= k->h) hit = true;
      else if (k->c - p > t_exact) break;
    }
    for (auto k = it; k != ivs.begin() && !hit;) {
      --k;
      if (p - k->c <= k->h) hit = true;
      else if (p - k->c > t_exact) break;
    }
    if (!hit) {
      fail("point " + std::to_string(set.points[i]) + " is not covered");
      break;
    }
  }
  const double lhsN = std::log2(static_cast<double>(c.N()));
  const double rhsN = std::log2(c.C_lambda) - 2.0 * c.d * std::log2(c.t);
  r.count_bound_ok = lhsN <= rhsN + 1e-9;
  return r;
}

namespace detail {

// smallest double >= x
inline double round_up(const cpp_rational& x) {
  double d = x.convert_to<double>();
  if (cpp_rational(d) < x) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  return d;
}

inline CoveringCertificate cover_cantor(const LambdaSet& set, double t) {
  const int D = set.cantor->D, depth = set.cantor->depth;
  // t_n = 2 * (largest tail below level n); t_depth = 2^{1 - D^{depth+1}}
  auto t_level = [&](int n) -> cpp_rational {
    if (n == depth) return pow2_neg(ipow(D, depth + 1) - 1);
    cpp_rational tail = 0;
    for (int j = n + 1; j <= depth; ++j) tail += pow2_neg(ipow(D, j));
    return tail * 2;
  };
  const cpp_rational t_exact(t);
  int n = 0;
  while (n < depth && t_level(n) > t_exact) ++n;
  const cpp_rational tn = t_level(n);
  // tn <= t and t is a double, so rounding tn up never exceeds t
  const double t_cert = n == depth ? std::min(t, round_up(tn)) : round_up(tn);
  if (!(t_cert > 0.0)) throw cap_exceeded("cover: certificate width underflows double precision");

  CoveringCertificate c;
  c.t = t_cert;
  c.level = n;
  c.C_lambda = 2.0;
  c.d = 1.0 / D;
  std::vector<cpp_rational> terms;
  for (int j = 1; j <= n; ++j) terms.push_back(pow2_neg(ipow(D, j)));
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    cpp_rational v = 0;
    for (int j = 1; j <= n; ++j)
      if (mask >> (n - j) & 1) v += terms[j - 1];
    CoverInterval iv;
    iv.num = boost::multiprecision::numerator(v);
    iv.den = boost::multiprecision::denominator(v);
    iv.center = v.convert_to<double>();
    iv.half_width = t_cert / 2.0;
    c.intervals.push_back(std::move(iv));
  }
  return c;
}

// continued-fraction convergents of x with denominator <= cap
inline std::vector<cpp_rational> convergents(const cpp_rational& x, std::int64_t cap) {
  std::vector<cpp_rational> out;
  cpp_int p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  cpp_int num = boost::multiprecision::numerator(x), den = boost::multiprecision::denominator(x);
  while (den != 0) {
    const cpp_int a = num / den;
    const cpp_int p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > cap) break;
    out.emplace_back(p2, q2);
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const cpp_int r = num - a * den;
    num = den;
    den = r;
  }
  return out;
}

inline CoveringCertificate cover_explicit(const LambdaSet& set, double t, std::int64_t den_cap) {
  CoveringCertificate c;
  c.t = t;
  const cpp_rational half = cpp_rational(t) / 2;
  std::size_t i = 0;
  while (i < set.exact.size()) {
    const auto& x = set.exact[i];
    std::optional<cpp_rational> best;
    for (const auto& cv : convergents(x, den_cap)) {
      const cpp_rational diff = cv > x ? cv - x : x - cv;
      if (diff <= half) {
        best = cv;
        break;
      }
    }
    if (!best)
      throw uncoverable("cover: no rational center with denominator <= cap within t/2 of point", set.points[i]);
    CoverInterval iv;
    iv.num = boost::multiprecision::numerator(*best);
    iv.den = boost::multiprecision::denominator(*best);
    iv.center = best->convert_to<double>();
    iv.half_width = t / 2.0;
    while (i < set.exact.size()) {
      const auto& y = set.exact[i];
      const cpp_rational diff = *best > y ? *best - y : y - *best;
      if (diff > half) break;
      ++i;
    }
    c.intervals.push_back(std::move(iv));
  }
  double d = 0.01;
  for (const auto& iv : c.intervals)
    if (iv.den > 1) d = std::max(d, log2_int(iv.den) / -std::log2(t));
  d = std::clamp(std::ceil(d * 100.0 - 1e-9) / 100.0, 0.01, 1.0);
  double logC = -std::numeric_limits<double>::infinity();
  for (const auto& iv : c.intervals) logC = std::max(logC, log2_int(iv.den) + d * std::log2(t));
  c.d = d;
  c.C_lambda = std::exp2(logC) * (1.0 + 1e-12);
  return c;
}

}  // namespace detail

inline constexpr std::int64_t kDenominatorCap = 1000000;

inline CoveringCertificate cover(const LambdaSet& set, double t, std::int64_t den_cap = kDenominatorCap) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("cover: t must lie in (0,1)");
  if (set.size() == 0) throw std::invalid_argument("cover: empty set");
  auto c = set.cantor ? detail::cover_cantor(set, t) : detail::cover_explicit(set, t, den_cap);
  const auto check = verify_certificate(set, c);
  if (!check.ok) throw std::logic_error("cover: certificate failed verification: " + check.reason);
  return c;
}

struct DimensionRow {
  double t = 0.0;       // requested
  double t_cert = 0.0;  // certified width
  std::size_t N = 0;
  double log2_qmax = 0.0;
};

struct DimensionReport {
  std::vector<DimensionRow> rows;
  double covering_exponent = 0.0;     // slope of log N vs log(1/t)
  double denominator_exponent = 0.0;  // slope of log q_max vs log(1/t)
  double max_pointwise_exponent = 0.0;
  bool degenerate = false;  // all N equal
};

inline DimensionReport dimension_estimate(const LambdaSet& set, const std::vector<double>& t_list) {
  if (t_list.size() < 3) throw std::invalid_argument("dimension_estimate: need at least 3 values of t");
  const auto [mn, mx] = std::minmax_element(t_list.begin(), t_list.end());
  if (!(*mx >= 100.0 * *mn)) throw std::invalid_argument("dimension_estimate: t values must span 2 decades");
  DimensionReport rep;
  std::vector<double> x, yN, yq;
  for (double t : t_list) {
    const auto c = cover(set, t);
    DimensionRow row{t, c.t, c.N(), 0.0};
    for (const auto& iv : c.intervals) row.log2_qmax = std::max(row.log2_qmax, log2_int(iv.den));
    rep.rows.push_back(row);
    x.push_back(-std::log2(c.t));
    yN.push_back(std::log2(static_cast<double>(c.N())));
    yq.push_back(row.log2_qmax);
    rep.max_pointwise_exponent = std::max(rep.max_pointwise_exponent, row.log2_qmax / -std::log2(c.t));
  }
  rep.degenerate = std::all_of(rep.rows.begin(), rep.rows.end(),
                               [&](const DimensionRow& r) { return r.N == rep.rows.front().N; });
  const bool flat_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
  if (!flat_x) {
    rep.covering_exponent = rep.degenerate ? 0.0 : fit_line(x, yN).slope;
    rep.denominator_exponent = fit_line(x, yq).slope;
  }
  return rep;
}

}  // namespace qcarleson
