#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcarleson/operators.hpp"

using namespace qcarleson;

static Signal gaussian(std::size_t L, Rng& rng, std::int64_t origin = 0) {
  Signal s;
  s.origin = origin;
  s.samples.resize(L);
  for (auto& v : s.samples) {
    const double re = rng.normal();
    v = {re, rng.normal()};
  }
  return s;
}

TEST(Kernel, ImpulseResponse) {
  const Signal f{{1.0}, 0};
  const auto out = apply_kernel(f, 0.0, 4);
  EXPECT_EQ(out.origin, -4);
  ASSERT_EQ(out.samples.size(), 9u);
  for (int n = -4; n <= 4; ++n) {
    const cplx v = out.samples[static_cast<std::size_t>(n + 4)];
    EXPECT_NEAR(std::abs(v - (n == 0 ? cplx{} : cplx(1.0 / n, 0.0))), 0.0, 1e-15) << n;
  }
}

TEST(Kernel, TapsAreOddInM) {
  const TruncatedKernel k{0.3717, 50};
  for (int m = 1; m <= 50; ++m) EXPECT_EQ(k.tap(-m), -k.tap(m));
  EXPECT_EQ(k.tap(0), cplx{});
  EXPECT_EQ(k.tap(51), cplx{});
}

TEST(Kernel, IntegerShiftOfLambda) {
  Rng rng(1);
  const auto f = gaussian(100, rng);
  const auto a = apply_kernel(f, 0.3125, 64), b = apply_kernel(f, 1.3125, 64);
  EXPECT_EQ(a.samples, b.samples);
}

TEST(Kernel, MatchesDirectSum) {
  Rng rng(2);
  const auto f = gaussian(512, rng);
  const auto fast = apply_kernel(f, 0.3717, 1024);
  const auto slow = oracle::convolve_direct(f.samples, 0.3717, 1024);
  ASSERT_EQ(fast.samples.size(), slow.size());
  double err = 0;
  for (std::size_t i = 0; i < slow.size(); ++i) err = std::max(err, std::abs(fast.samples[i] - slow[i]));
  EXPECT_LE(err, 1e-10);
}

TEST(Kernel, MatchesDirectSumRandomSizes) {
  Rng rng(3);
  for (int t = 0; t < 6; ++t) {
    const auto L = 1 + rng.index(512);
    const auto R = static_cast<std::int64_t>(1 + rng.index(1024));
    const double lam = rng.uniform();
    const auto f = gaussian(L, rng);
    const auto fast = apply_kernel(f, lam, R);
    const auto slow = oracle::convolve_direct(f.samples, lam, R);
    double err = 0;
    for (std::size_t i = 0; i < slow.size(); ++i) err = std::max(err, std::abs(fast.samples[i] - slow[i]));
    EXPECT_LE(err, 1e-10) << L << " " << R;
  }
}

TEST(Kernel, Linearity) {
  Rng rng(4);
  const auto f = gaussian(300, rng), g = gaussian(300, rng);
  const cplx a(0.7, -1.3), b(-2.0, 0.4);
  Signal h;
  for (std::size_t i = 0; i < 300; ++i) h.samples.push_back(a * f.samples[i] + b * g.samples[i]);
  const auto Kf = apply_kernel(f, 0.21, 500), Kg = apply_kernel(g, 0.21, 500), Kh = apply_kernel(h, 0.21, 500);
  for (std::size_t i = 0; i < Kh.samples.size(); ++i)
    EXPECT_LT(std::abs(Kh.samples[i] - a * Kf.samples[i] - b * Kg.samples[i]), 1e-10);
}

TEST(Kernel, TranslationCovariance) {
  Rng rng(5);
  auto f = gaussian(200, rng);
  const auto a = apply_kernel(f, 0.77, 300);
  f.origin = 37;
  const auto b = apply_kernel(f, 0.77, 300);
  EXPECT_EQ(b.origin, a.origin + 37);
  EXPECT_EQ(a.samples, b.samples);
}

TEST(Kernel, Rejections) {
  EXPECT_THROW(apply_kernel(Signal{{1.0}, 0}, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(apply_kernel(Signal{{}, 0}, 0.1, 4), std::invalid_argument);
  EXPECT_THROW(apply_kernel(Signal{{1.0}, 0}, 0.1, kConvolutionCap), cap_exceeded);
}

TEST(Maximal, SingletonIsModulus) {
  Rng rng(6);
  const auto f = gaussian(128, rng);
  const auto set = LambdaSet::explicit_set({cpp_rational(3, 7)});
  const auto mx = carleson_max(f, set, 256);
  const auto y = apply_kernel(f, set.points[0], 256);
  ASSERT_EQ(mx.values.size(), y.samples.size());
  EXPECT_EQ(mx.origin, y.origin);
  for (std::size_t i = 0; i < y.samples.size(); ++i) EXPECT_NEAR(mx.values[i], std::abs(y.samples[i]), 1e-12);
}

TEST(Maximal, MonotoneInLambda) {
  Rng rng(7);
  const auto f = gaussian(256, rng);
  const auto big = cantor_set(3, 3);
  const auto small = LambdaSet::explicit_set({big.exact[1], big.exact[5]});
  const auto a = carleson_max(f, small, 512), b = carleson_max(f, big, 512);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_LE(a.values[i], b.values[i] + 1e-12);
}

TEST(Maximal, AlignedChirpBeatsNoise) {
  const auto set = cantor_set(3, 3);
  const std::int64_t L = 256, R = 4 * L;
  const double lam0 = set.points[2];  // 2^-9
  ASSERT_EQ(lam0, std::ldexp(1.0, -9));
  Signal chirp;
  for (std::int64_t n = 0; n < L; ++n) chirp.samples.push_back(expi(frac_mul(lam0, n * n)));
  const double rc = l2_norm(carleson_max(chirp, set, R).values) / l2_norm(chirp.samples);
  Rng rng(8);
  double rg = 0;
  for (int t = 0; t < 10; ++t) {
    const auto g = gaussian(L, rng);
    rg = std::max(rg, l2_norm(carleson_max(g, set, R).values) / l2_norm(g.samples));
  }
  EXPECT_GT(rc, rg);
}

TEST(Maximal, EmptySetRejected) {
  LambdaSet empty;
  EXPECT_THROW(carleson_max(Signal{{1.0}, 0}, empty, 4), std::invalid_argument);
}

TEST(Maximal, TruncationStability) {
  const auto set = cantor_set(3, 4);
  Rng rng(3);
  const auto f = gaussian(256, rng);
  const double a = l2_norm(carleson_max(f, set, 4096).values);
  const double b = l2_norm(carleson_max(f, set, 8192).values);
  EXPECT_LT(std::abs(b - a) / a, 0.01);
}

TEST(NormProbe, HilbertCasePlateaus) {
  NormProbeConfig c;
  c.lengths = {256, 512, 1024, 2048};
  c.trials = 12;
  const auto r = norm_probe(LambdaSet::explicit_set({0}), c);
  ASSERT_EQ(r.rows.size(), 4u);
  // the truncated 1/m multiplier is bounded by 2 Si(pi) = 3.7039
  for (const auto& row : r.rows) EXPECT_LE(row.max_ratio, 3.704);
  EXPECT_LT(r.rows.back().growth, 1.1);
}

TEST(NormProbe, Rejections) {
  NormProbeConfig c;
  c.trials = 0;
  EXPECT_THROW(norm_probe(cantor_set(2, 2), c), std::invalid_argument);
  c.trials = 3;
  c.lengths.clear();
  EXPECT_THROW(norm_probe(cantor_set(2, 2), c), std::invalid_argument);
}

TEST(NormProbe, Deterministic) {
  NormProbeConfig c;
  c.lengths = {64, 128};
  c.trials = 8;
  c.seed = 11;
  const auto a = norm_probe(cantor_set(2, 3), c), b = norm_probe(cantor_set(2, 3), c);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].max_ratio, b.rows[i].max_ratio);
}

static std::vector<cplx> mode(std::size_t G, std::size_t g) {
  std::vector<cplx> f(G);
  f[g] = 1.0;
  Fft::inverse(f);
  return f;
}

TEST(Bourgain, SingleFrequencyDc) {
  const std::size_t G = 1024;
  const double tau = 0.25;
  const auto lambdas = dyadic_grid(5.0, 40.0, 4);
  std::vector<cplx> f(G, cplx(1.0, 0.0));
  EXPECT_NEAR(bourgain_max_probe({0.0}, tau, G, lambdas, f), 1.0, 1e-10);
}

TEST(Bourgain, FarModeIsInvisible) {
  const std::size_t G = 1024;
  const double tau = 0.25;
  const auto lambdas = dyadic_grid(5.0, 40.0, 4);
  const auto f = mode(G, 3);
  const double one = bourgain_max_probe({0.0}, tau, G, lambdas, f);
  const double two = bourgain_max_probe({0.0, 0.5}, tau, G, lambdas, f);
  EXPECT_NEAR(one, two, 1e-12);
}

TEST(Bourgain, Rejections) {
  const std::size_t G = 256;
  std::vector<cplx> f(G, 1.0);
  EXPECT_THROW(bourgain_max_probe({0.0, 0.1}, 0.25, G, {8.0}, f), std::invalid_argument);
  EXPECT_THROW(bourgain_max_probe({0.0}, 0.25, G, {3.0}, f), std::invalid_argument);
  EXPECT_THROW(bourgain_max_probe({0.0}, 0.25, 100, {8.0}, std::vector<cplx>(100)), std::invalid_argument);
}

TEST(Bourgain, SmallGrowthRun) {
  GrowthConfig c;
  c.Ns = {1, 2, 4};
  c.trials = 4;
  c.grid = 4096;
  const auto rows = bourgain_growth(c);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_GE(r.max_ratio, 0.0);
    EXPECT_TRUE(std::isfinite(r.max_ratio));
  }
  EXPECT_EQ(rows[0].ratio_over_log2N, 0.0);
}

TEST(Oscillatory, SingletonMatchesPlainMultiplier) {
  const std::size_t G = 1024;
  const double tau = 1.0 / 16;
  const int k0 = 4, k1 = 6;
  const double lam = tau * tau / 4;
  Rng rng(9);
  std::vector<cplx> f(G);
  for (auto& v : f) {
    const double re = rng.normal();
    v = {re, rng.normal()};
  }
  const double r = oscillatory_max_probe({0.0, 0.5}, tau, k0, k1, G, {lam}, f);
  std::vector<cplx> m(G), F = f;
  oscillatory_multiplier({0.0, 0.5}, tau, k0, k1, lam, 1e-10, m);
  Fft::forward(F);
  for (std::size_t g = 0; g < G; ++g) F[g] *= m[g];
  Fft::inverse(F);
  for (auto& v : F) v /= static_cast<double>(G);
  EXPECT_NEAR(r, l2_norm(F) / l2_norm(f), 1e-12);
}

TEST(Oscillatory, SmallLambdaLimit) {
  const std::size_t G = 2048;
  const double tau = 1.0 / 16;
  const int k0 = 4, k1 = 8;
  std::vector<cplx> m0(G), m1(G);
  oscillatory_multiplier({0.0}, tau, k0, k1, 1e-14, 1e-12, m1);
  // lambda = 0 symbol: sum_k H_k(0, xi) phihat(xi / tau)
  for_each_near(0.0, 0.25 * tau, G, [&](std::size_t g, double d) {
    cplx s = 0;
    for (int k = k0; k <= k1; ++k) s += h_j(k, 0.0, d);
    m0[g] = s * bump::phi_hat(d / tau);
  });
  double diff = 0, sup = 0;
  for (std::size_t g = 0; g < G; ++g) {
    diff = std::max(diff, std::abs(m1[g] - m0[g]));
    sup = std::max(sup, std::abs(m0[g]));
  }
  EXPECT_LT(diff, 1e-6);
  // truncated Hilbert-type symbol: |sum_k H_k(0, .)| stays below 2 Si(pi)
  EXPECT_LT(sup, 3.704);
  Rng rng(10);
  std::vector<cplx> f(G);
  for (auto& v : f) {
    const double re = rng.normal();
    v = {re, rng.normal()};
  }
  EXPECT_LT(oscillatory_max_probe({0.0}, tau, k0, k1, G, {1e-14}, f), 3.704);
}

TEST(Oscillatory, Rejections) {
  const std::size_t G = 256;
  std::vector<cplx> f(G, 1.0);
  // 2^3 < 1/tau
  EXPECT_THROW(oscillatory_max_probe({0.0}, 1.0 / 16, 3, 5, G, {1e-3}, f), std::invalid_argument);
  // 2^7 > G/4
  EXPECT_THROW(oscillatory_max_probe({0.0}, 1.0 / 16, 4, 7, G, {1e-3}, f), std::invalid_argument);
  // lambda above tau^2
  EXPECT_THROW(oscillatory_max_probe({0.0}, 1.0 / 16, 4, 5, G, {0.01}, f), std::invalid_argument);
}

TEST(SingleL, ZeroSignal) {
  const std::size_t G = 1024;
  const auto lambdas = single_l_lambdas(2, 2, 4);
  EXPECT_EQ(single_l_max_probe(2, G, lambdas, std::vector<cplx>(G)), 0.0);
}

TEST(SingleL, SingletonMatchesPlainMultiplier) {
  const std::size_t G = 1024;
  const int l = 2;
  const double lam = single_l_lambdas(l, 2, 4)[3];
  Rng rng(12);
  std::vector<cplx> f(G);
  for (auto& v : f) {
    const double re = rng.normal();
    v = {re, rng.normal()};
  }
  std::vector<cplx> m(G), F = f;
  single_l_multiplier(l, lam, m);
  Fft::forward(F);
  for (std::size_t g = 0; g < G; ++g) F[g] *= m[g];
  Fft::inverse(F);
  for (auto& v : F) v /= static_cast<double>(G);
  EXPECT_NEAR(single_l_max_probe(l, G, {lam}, f), l2_norm(F) / l2_norm(f), 1e-12);
}

TEST(SingleL, MultiplierMatchesPointwise) {
  const std::size_t G = 512;
  const int l = 2;
  const double lam = single_l_lambdas(l, 2, 4)[5];
  const auto s = ScaleIndex::from(lam, l);
  ASSERT_TRUE(s);
  std::vector<cplx> m(G);
  single_l_multiplier(l, lam, m);
  for (std::size_t g = 0; g < G; g += 17) {
    const double xi = wrap(static_cast<double>(g) / G);
    EXPECT_LT(std::abs(m[g] - h_j(s->k, lam, xi)), 1e-12) << g;
  }
}

TEST(SingleL, WrongParityIsZero) {
  std::vector<cplx> m(256);
  // lambda = 1/16 has 2k - 1 = 4 with no integer k
  single_l_multiplier(1, 1.0 / 16, m);
  for (const auto& v : m) EXPECT_EQ(v, cplx{});
}

TEST(SingleL, Rejections) {
  SingleLConfig c;
  EXPECT_THROW(single_l_row(-1, c), std::invalid_argument);
  c.ls = {0};
  EXPECT_THROW(single_l_sweep(c), std::invalid_argument);
}
