#include <gtest/gtest.h>

#include <cmath>

#include "qcarleson/bump.hpp"
#include "qcarleson/util.hpp"

using namespace qcarleson;
using namespace qcarleson::bump;

TEST(PsiK, VanishesInsideQuarter) { EXPECT_EQ(psi_k(0, 0.1), 0.0); }

TEST(PsiK, OddAtScaleThree) { EXPECT_EQ(psi_k(3, -5.0), -psi_k(3, 5.0)); }

TEST(PsiK, TwoPieceResolutionAtPointSix) {
  EXPECT_NEAR(psi_k(0, 0.6), 1.0 / 0.6 - psi_k(1, 0.6), 1e-12);
}

TEST(PsiK, SupportIsDyadicAnnulus) {
  for (int k = -3; k <= 6; ++k)
    for (double t = -80; t <= 80; t += 0.0137) {
      const double a = std::abs(t);
      if (a < std::ldexp(1.0, k - 2) || a > std::ldexp(1.0, k)) {
        EXPECT_EQ(psi_k(k, t), 0.0) << k << " " << t;
      }
    }
}

TEST(PsiK, ResolutionOfReciprocal) {
  const int K = 14;
  for (double t = 1.0; t <= std::ldexp(1.0, K - 2); t *= 1.0137) {
    double s = 0, sm = 0;
    for (int k = 0; k <= K; ++k) {
      s += psi_k(k, t);
      sm += psi_k(k, -t);
    }
    EXPECT_NEAR(s, 1.0 / t, 1e-12) << t;
    EXPECT_NEAR(sm, -1.0 / t, 1e-12) << t;
  }
}

TEST(PsiK, BoundedByFour) {
  double mx = 0;
  for (double t = -1.2; t <= 1.2; t += 1e-5) mx = std::max(mx, std::abs(psi(t)));
  EXPECT_LE(mx, BumpFamily::psi_bound);
  EXPECT_GT(mx, 1.0);
}

TEST(ChiS, Plateau) { EXPECT_EQ(chi_s(1, 0.0), 1.0); }

TEST(ChiS, OutsideSupport) { EXPECT_EQ(chi_s(2, 0.01), 0.0); }

TEST(ChiS, StrictTransition) {
  const double v = chi_s(1, 0.015);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
}

TEST(ChiS, RejectsNonPositiveScale) { EXPECT_THROW(chi_s(0, 0.0), std::invalid_argument); }

TEST(ChiS, PlateauAndSupportRadii) {
  for (int s = 1; s <= 4; ++s) {
    const double p = std::pow(10.0, -s);
    EXPECT_EQ(chi_s(s, 0.1 * p * 0.999), 1.0);
    EXPECT_EQ(chi_s(s, 0.2 * p * 1.001), 0.0);
  }
}

TEST(PhiHat, Values) {
  EXPECT_EQ(phi_hat(0.0), 1.0);
  EXPECT_EQ(phi_hat(0.3), 0.0);
  const double v = phi_hat(3.0 / 16.0);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
}

TEST(Sandwich, DenseGrid) {
  for (double t = -1.5; t <= 1.5; t += 1e-4) {
    const double a = std::abs(t);
    const double c = chi(t), p = phi_hat(t), q = psi(t);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    if (a <= 0.1) { EXPECT_EQ(c, 1.0); }
    if (a >= 0.2) { EXPECT_EQ(c, 0.0); }
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    if (a <= 0.125) { EXPECT_EQ(p, 1.0); }
    if (a >= 0.25) { EXPECT_EQ(p, 0.0); }
    if (a < 0.25 || a > 1.0) { EXPECT_EQ(q, 0.0); }
  }
}

TEST(Symmetry, RandomPoints) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double t = 3.0 * (2.0 * rng.uniform() - 1.0);
    EXPECT_NEAR(psi(-t), -psi(t), 1e-14);
    EXPECT_NEAR(chi(-t), chi(t), 1e-14);
    EXPECT_NEAR(phi_hat(-t), phi_hat(t), 1e-14);
  }
}
