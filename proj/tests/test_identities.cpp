#include <cmath>

#include <gtest/gtest.h>

#include "kharm/curves.hpp"
#include "kharm/flow.hpp"
#include "kharm/identities.hpp"
#include "kharm/precision.hpp"

using namespace kharm;
using Space = ModelSpace<double>;

namespace {

const DiscreteMap<quad>& biharmonic_circle() {
  static const DiscreteMap<quad> c = [] {
    auto S2 = ModelSpace<quad>::sphere(2);
    return latitude_circle(S2, biharmonic_circle_search(S2, 1024), 1024);
  }();
  return c;
}

}  // namespace

TEST(Identities, ToleranceSchedule) {
  EXPECT_EQ(identity_tolerance(0), 1e-3);
  EXPECT_EQ(identity_tolerance(2), 1e-3);
  EXPECT_EQ(identity_tolerance(3), 1e-2);
  EXPECT_EQ(identity_tolerance(4), 1e-2);
  EXPECT_EQ(identity_tolerance(5), 5e-2);
  EXPECT_EQ(identity_tolerance(6), 5e-2);
}

TEST(Identities, GeodesicSatisfiesEverything) {
  // Quad: in double the discrete great circle is harmonic only to roundoff,
  // which five Laplacians amplify to ~1e-3.
  auto gc = great_circle(ModelSpace<quad>::sphere(2), 256);
  EXPECT_LE(check_prop_3_1(gc).residual, 1e-20);
  for (int l = 0; l <= 2; ++l) {
    EXPECT_LE(check_lemma_3_2(gc, l).residual, 1e-15);
    EXPECT_LE(check_lemma_3_3(gc, l).residual, 1e-15);
  }
  EXPECT_LE(check_theorem_3_4(gc, 2).residual, 1e-15);
  EXPECT_LE(check_theorem_3_5(gc, 1).residual, 1e-15);
  EXPECT_LE(check_bochner_e4(gc).residual, 1e-20);
}

TEST(Identities, BiharmonicCircleSuite) {
  const auto& c = biharmonic_circle();
  auto p = check_prop_3_1(c);
  EXPECT_TRUE(p.passed);
  EXPECT_LE(p.residual, 1e-3);
  EXPECT_LE(p.tau2_sup, 1e-6);
  EXPECT_LE(check_lemma_3_2(c, 0).residual, 1e-6);
  EXPECT_LE(check_lemma_3_2(c, 2).residual, 1e-2);
  EXPECT_LE(check_lemma_3_3(c, 0).residual, 1e-3);
  EXPECT_LE(check_lemma_3_3(c, 1).residual, 1e-2);
  auto t4 = check_theorem_3_4(c, 2);
  EXPECT_LE(t4.residual / t4.scale, 1e-2);
  EXPECT_NEAR(t4.scale, 2.0, 1e-2);  // tau_4 = -2 tau, |tau| = 1
  auto t6 = check_theorem_3_4(c, 3);
  EXPECT_LE(t6.residual / t6.scale, 5e-2);
  EXPECT_NEAR(t6.scale, 4.0, 2e-2);
  auto t3 = check_theorem_3_5(c, 1);
  EXPECT_LE(t3.residual / t3.scale, 1e-2);
  auto t5 = check_theorem_3_5(c, 2);
  EXPECT_LE(t5.residual / t5.scale, 5e-2);
  EXPECT_NEAR(t5.scale, 3.0, 2e-2);
  for (const auto& r : {t3, t4, t5, t6}) EXPECT_TRUE(r.passed) << r.name;
}

TEST(Identities, EuclideanCircleIsNotBiharmonic) {
  for (double r : {0.5, 1.0, 2.0}) {
    auto c = circle_map<double>(2, r, 512);
    auto rep = check_prop_3_1(c);
    EXPECT_NEAR(rep.residual, std::pow(r, -3), 1e-3 * std::pow(r, -3));
    EXPECT_NEAR(rep.tau2_sup, rep.residual, 1e-12);
    EXPECT_FALSE(rep.passed);
  }
}

TEST(Identities, Preconditions) {
  auto e = ellipse_map<double>(2.0, 1.0, 128);
  EXPECT_THROW(check_prop_3_1(e), PreconditionViolation);
  EXPECT_THROW(check_lemma_3_2(e, 0), PreconditionViolation);
  auto gc = great_circle(Space::sphere(2), 64);
  EXPECT_THROW(check_lemma_3_2(gc, -1), InvalidArgument);
  EXPECT_THROW(check_lemma_3_3(gc, -1), InvalidArgument);
  EXPECT_THROW(check_theorem_3_4(gc, 1), InvalidArgument);
  EXPECT_THROW(check_theorem_3_5(gc, 0), InvalidArgument);
  auto c = circle_map<double>(2, 1.0, 64);
  EXPECT_THROW(check_theorem_3_4(c, 2), InvalidArgument);
  EXPECT_THROW(check_theorem_3_5(c, 1), InvalidArgument);
}

TEST(Identities, VerdictIsRelative) {
  auto c = circle_map<double>(2, 0.5, 256);
  auto rep = check_prop_3_1(c, 1e-3);
  EXPECT_EQ(rep.passed, rep.residual <= rep.tol * std::max(1.0, rep.scale));
}

// Chain: residual(l) <= C residual(eigen relation) (m|K|)^{l-1} + O(h^2).
TEST(Identities, OrthogonalityChainConsistency) {
  const auto& c = biharmonic_circle();
  double prop = check_prop_3_1(c).residual;
  double h = to_double(c.domain().spacing(0));
  for (int l = 1; l <= 2; ++l) EXPECT_LE(check_lemma_3_2(c, l).residual, 10 * prop + h * h);
}

TEST(Bochner, UniformCircleIsExact) {
  for (double r : {0.5, 1.0, 2.0}) {
    auto rep = check_bochner_e4(circle_map<double>(2, r, 256));
    EXPECT_LE(rep.residual, 1e-6 * rep.scale);
    EXPECT_TRUE(rep.passed);
  }
}

TEST(Bochner, SecondOrderConvergence) {
  double prev = 0;
  for (int N : {256, 512, 1024}) {
    auto rep = check_bochner_e4(warped_circle<quad>(quad(1), quad(0.3), N));
    if (prev > 0) EXPECT_NEAR(prev / rep.residual, 4.0, 0.8) << "N=" << N;
    prev = rep.residual;
  }
}

TEST(Bochner, IntegratedIdentityOnRandomCurves) {
  for (auto s : {Space::euclidean(3), Space::sphere(2), Space::hyperbolic(2)}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      RandomCurveSpec spec;
      spec.base = RandomCurveSpec::Base::Loop;
      spec.samples = 256;
      spec.seed = seed;
      auto rep = check_bochner_e4(random_closed_curve(s, spec));
      EXPECT_LE(rep.integrated, 1e-10 * 256);
    }
  }
}

// The curvature terms of the Green's form carry sign -K: non-negative
// pointwise for K <= 0, and not so on the sphere.
TEST(Bochner, CurvatureTermSigns) {
  for (auto s : {Space::euclidean(2), Space::hyperbolic(2), Space::hyperbolic(3, -3.0)}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RandomCurveSpec spec;
      spec.base = RandomCurveSpec::Base::Loop;
      spec.samples = 128;
      spec.seed = seed;
      auto t = bochner_terms(random_closed_curve(s, spec));
      EXPECT_GE(t.min_t1, 0.0);
      EXPECT_GE(t.min_t2, -1e-12 * std::abs(t.t2));
      EXPECT_GE(t.min_t3, 0.0);
    }
  }
  RandomCurveSpec spec;
  spec.base = RandomCurveSpec::Base::Loop;
  spec.samples = 128;
  auto t = bochner_terms(random_closed_curve(Space::sphere(2), spec));
  EXPECT_LT(t.t2, 0.0);
  EXPECT_LT(t.t3, 0.0);
}
