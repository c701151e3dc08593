#include <random>

#include <gtest/gtest.h>

#include "kharm/curve_classify.hpp"

using namespace kharm;

namespace {

RVec rv(std::initializer_list<Rational> xs) { return RVec(xs); }

PolynomialCurve line(int n) {
  RVec a0(n, Rational(0)), a1(n, Rational(0));
  a1[0] = Rational(3, 5);
  if (n > 1) a1[1] = Rational(4, 5);
  a0[0] = Rational(1, 7);
  return PolynomialCurve(n, {a0, a1});
}

// Truncated Taylor series of the unit circle (cos s, sin s), degree 5.
PolynomialCurve circle_series() {
  return PolynomialCurve(2, {rv({1, 0}), rv({0, 1}), rv({Rational(-1, 2), 0}), rv({0, Rational(-1, 6)}),
                             rv({Rational(1, 24), 0}), rv({0, Rational(1, 120)})});
}

}  // namespace

TEST(MeanCurvaturePower, Examples) {
  for (int k = 1; k <= 5; ++k) EXPECT_TRUE(mean_curvature_power(line(3), k).is_zero());
  auto cubic = monomial_curve(2, 3, 0);
  auto lap = laplacian_power(cubic, 1);  // Delta x = -x''
  EXPECT_EQ(lap.degree(), 1);
  EXPECT_EQ(lap.coeffs[1][0], -6);
  EXPECT_FALSE(mean_curvature_power(cubic, 1).is_zero());
  auto quartic = monomial_curve(2, 4, 0);
  auto l2 = laplacian_power(quartic, 2);
  EXPECT_EQ(l2.degree(), 0);
  EXPECT_EQ(l2.coeffs[0][0], 24);
  EXPECT_TRUE(mean_curvature_power(quartic, 3).is_zero());
  EXPECT_THROW(mean_curvature_power(quartic, 0), InvalidArgument);
}

TEST(MeanCurvaturePower, ZeroIffLowDegree) {
  for (int k = 1; k <= 4; ++k)
    for (int d = 0; d <= 9; ++d)
      EXPECT_EQ(mean_curvature_power(monomial_curve(3, d, 1, Rational(2, 3)), k).is_zero(), d <= 2 * k - 1);
}

TEST(SpeedConstraints, LineIsUnitSpeed) {
  auto sys = speed_constraints(line(2));
  ASSERT_EQ(sys.equations.size(), 1u);
  EXPECT_EQ(sys.equations[0].to_string(), "|a1|^2 = 1");
  EXPECT_TRUE(is_consistent(sys, line(2)));
}

TEST(SpeedConstraints, QuadraticExpansion) {
  auto sys = general_speed_system(2);
  ASSERT_EQ(sys.equations.size(), 3u);
  EXPECT_EQ(sys.equations[2].to_string(), "4*|a2|^2 = 0");
  EXPECT_EQ(sys.equations[1].to_string(), "4*<a1,a2> = 0");
  EXPECT_EQ(sys.equations[0].to_string(), "|a1|^2 = 1");
}

TEST(SpeedConstraints, EquationCount) {
  for (int d = 1; d <= 9; ++d) EXPECT_EQ(general_speed_system(d).equations.size(), 2u * (d - 1) + 1);
  EXPECT_THROW(speed_constraints(monomial_curve(2, 0, 0)), InvalidArgument);
}

TEST(SpeedConstraints, CircleSeriesIsInconsistent) {
  auto c = circle_series();
  EXPECT_FALSE(is_consistent(speed_constraints(c), c));
  auto poly = speed_residual_polynomial(c);
  EXPECT_GT(poly.size(), 1u);
  EXPECT_EQ(poly[0], 0);  // unit speed at s = 0 ...
  EXPECT_NE(poly.back(), 0);  // ... but not identically
}

TEST(SpeedConstraints, ResidualsMatchExpansion) {
  auto c = PolynomialCurve(2, {rv({1, 2}), rv({Rational(1, 2), 0}), rv({0, Rational(1, 3)}), rv({Rational(1, 5), 1})});
  auto res = constraint_residuals(speed_constraints(c), c);
  auto poly = speed_residual_polynomial(c);
  ASSERT_EQ(res.size(), poly.size());
  for (std::size_t j = 0; j < res.size(); ++j) EXPECT_EQ(res[j], poly[j]) << j;
}

TEST(Classify, BiharmonicCurvesInE3) {
  auto c = classify_straight_line(2, 3);
  EXPECT_EQ(c.verdict, CurveVerdict::StraightLine);
  ASSERT_EQ(c.certificate.size(), 2u);
  EXPECT_EQ(c.certificate[0].index, 3);
  EXPECT_EQ(c.certificate[0].equation.to_string(), "9*|a3|^2 = 0");
  EXPECT_EQ(c.certificate[0].equation.power, 4);
  EXPECT_EQ(c.certificate[1].index, 2);
  EXPECT_EQ(c.certificate[1].equation.to_string(), "4*|a2|^2 = 0");
  EXPECT_EQ(c.certificate_text(), "3 | 9*|a3|^2 = 0 | a3 = 0\n2 | 4*|a2|^2 = 0 | a2 = 0\n");
}

TEST(Classify, HarmonicCaseIsTrivial) {
  auto c = classify_straight_line(1, 4);
  EXPECT_EQ(c.verdict, CurveVerdict::StraightLine);
  EXPECT_TRUE(c.certificate.empty());
}

TEST(Classify, LongCertificate) {
  auto c = classify_straight_line(5, 4);
  EXPECT_EQ(c.verdict, CurveVerdict::StraightLine);
  ASSERT_EQ(c.certificate.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(c.certificate[i].index, 9 - i);
  EXPECT_EQ(c.certificate[0].equation.power, 16);  // s^{4k-4}
  EXPECT_TRUE(replay_certificate(c));
  // Any rational unit-speed line solves the surviving system exactly.
  EXPECT_TRUE(is_consistent(c.final_system, line(4)));
}

TEST(Classify, AllSmallCases) {
  for (int k = 1; k <= 5; ++k)
    for (int n = 1; n <= 4; ++n) {
      auto c = classify_straight_line(k, n);
      EXPECT_EQ(c.verdict, CurveVerdict::StraightLine);
      EXPECT_EQ(static_cast<int>(c.certificate.size()), 2 * k - 2);
      ASSERT_EQ(c.final_system.equations.size(), 1u);
      EXPECT_EQ(c.final_system.equations[0].to_string(), "|a1|^2 = 1");
      EXPECT_TRUE(replay_certificate(c));
    }
  EXPECT_THROW(classify_straight_line(0, 2), InvalidArgument);
  EXPECT_THROW(classify_straight_line(2, 0), InvalidArgument);
}

TEST(Classify, TamperedCertificateFailsReplay) {
  auto c = classify_straight_line(3, 2);
  c.certificate[1].equation.weights.begin()->second += 1;
  EXPECT_FALSE(replay_certificate(c));
}

TEST(CrossCheck, StraightLine) {
  for (int k = 1; k <= 4; ++k) EXPECT_LE(discrete_cross_check(line(3), k, 64).discrete_sup, 1e-12);
  EXPECT_THROW(discrete_cross_check(line(2), 3, 15), InsufficientResolution);
  EXPECT_NO_THROW(discrete_cross_check(line(2), 3, 16));
}

TEST(CrossCheck, NonUnitSpeedCubicConverges) {
  auto x = monomial_curve(2, 3, 0) + monomial_curve(2, 1, 1);
  // x'''' = 0, so k = 2 is exact even on the grid.
  EXPECT_EQ(discrete_cross_check(x, 2, 32).difference, 0.0);
  // Degree-6 data: discrete and exact k = 2 values agree at order 2.
  auto y = monomial_curve(2, 6, 0) + monomial_curve(2, 1, 1);
  double e1 = discrete_cross_check(y, 2, 33).difference;
  double e2 = discrete_cross_check(y, 2, 65).difference;
  EXPECT_GT(e1, 0.0);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
}
