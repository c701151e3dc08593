#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kharm/curves.hpp"
#include "kharm/discrete_map.hpp"

using namespace kharm;
using V = Vec<double>;
using M = Mat<double>;
using Space = ModelSpace<double>;

namespace {

V vec(std::initializer_list<double> xs) {
  V v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double max_err(const M& a, const M& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

// Unit-speed straight line along e1 in E^2 (closed through the seam shift).
DiscreteMap<double> unit_line(int N, double L) {
  return line_map<double>(vec({1, 0}), vec({0.5, -1}), L, N);
}

// V(s) = sin(2 pi s / L) e2 along the unit line.
SectionField<double> sine_field(const DiscreteMap<double>& line) {
  double L = line.domain().length(0);
  M v = M::Zero(2, line.size());
  for (int i = 0; i < line.size(); ++i) v(1, i) = std::sin(2 * M_PI * line.domain().position(i, 0) / L);
  return make_field(line, v);
}

}  // namespace

TEST(Domain, Validation) {
  EXPECT_THROW(Domain<double>::closed_curve(1.0, 7), InvalidArgument);
  EXPECT_THROW(Domain<double>::closed_curve(0.0, 16), InvalidArgument);
  EXPECT_THROW(Domain<double>::closed_curve(1.0, 16, 3), InvalidArgument);
  auto t = Domain<double>::flat_torus(1.0, 2.0, 8, 10);
  EXPECT_EQ(t.size(), 80);
  EXPECT_DOUBLE_EQ(t.cell_volume(), 1.0 / 8 * 2.0 / 10);
  int w = 0;
  EXPECT_EQ(t.neighbor(7, 0, 1, &w), 0);
  EXPECT_EQ(w, 1);
  EXPECT_EQ(t.neighbor(3, 1, -1, &w), 3 + 9 * 8);
  EXPECT_EQ(w, -1);
}

TEST(DiscreteMap, RejectsOffManifoldPoints) {
  auto dom = Domain<double>::closed_curve(1.0, 8);
  M pts = M::Zero(3, 8);
  EXPECT_THROW(DiscreteMap<double>(dom, Space::sphere(2), pts), InvalidArgument);
  EXPECT_THROW(DiscreteMap<double>(dom, Space::sphere(2), M::Zero(2, 8)), InvalidArgument);
  pts.row(2).setOnes();
  EXPECT_THROW(DiscreteMap<double>(dom, Space::sphere(2), pts, {vec({1, 0, 0}), V()}),
               InvalidArgument);
}

TEST(Dphi, StraightLineIsExact) {
  auto line = unit_line(32, 3.0);
  auto d = dphi(line, 0);
  for (int i = 0; i < line.size(); ++i) EXPECT_LE((d.at(i) - vec({1, 0})).norm(), 1e-13);
}

TEST(Dphi, UnitCircleTangent) {
  for (int N : {64, 128}) {
    auto c = circle_map<double>(2, 1.0, N);
    auto d = dphi(c, 0);
    double err = 0;
    for (int i = 0; i < N; ++i) {
      double s = c.domain().position(i, 0);
      err = std::max(err, (d.at(i) - vec({-std::sin(s), std::cos(s)})).norm());
    }
    double h = 2 * M_PI / N;
    EXPECT_LE(err, h * h);  // analytic error h^2/6
  }
}

TEST(Dphi, ConstantMapGivesZero) {
  auto c = constant_map(Space::sphere(2), vec({0, 0, 1}), 1.0, 16);
  EXPECT_EQ(dphi(c, 0).sup_norm(), 0.0);
}

TEST(CovariantDerivative, Examples) {
  auto line = unit_line(128, 2.0);
  M ones = M::Zero(2, line.size());
  ones.row(1).setOnes();
  EXPECT_LE(covariant_derivative(make_field(line, ones), 0).sup_norm(), 1e-13);

  auto V1 = sine_field(line);
  auto dV = covariant_derivative(V1, 0);
  double L = 2.0, err = 0;
  for (int i = 0; i < line.size(); ++i) {
    double s = line.domain().position(i, 0);
    err = std::max(err, std::abs(dV.at(i)(1) - 2 * M_PI / L * std::cos(2 * M_PI * s / L)));
  }
  double h = L / 128;
  EXPECT_LE(err, std::pow(2 * M_PI / L, 3) * h * h / 6 * 1.01);

  auto gc = great_circle(Space::sphere(2), 128);
  EXPECT_LE(covariant_derivative(dphi(gc, 0), 0).sup_norm(), 1e-12);
}

TEST(RoughLaplacian, Examples) {
  auto line = unit_line(256, 2.0);
  auto V1 = sine_field(line);
  EXPECT_EQ(rough_laplacian(V1, -1).sup_norm(), 0.0);
  EXPECT_EQ(max_err(rough_laplacian(V1, 0).vectors, V1.vectors), 0.0);
  EXPECT_THROW(rough_laplacian(V1, -2), InvalidArgument);
  double lam = std::pow(2 * M_PI / 2.0, 2);
  auto lap = rough_laplacian(V1, 1);
  double err = max_err(lap.vectors, lam * V1.vectors);
  double h = 2.0 / 256;
  EXPECT_LE(err, lam * lam * h * h / 3 * 1.01);
}

TEST(RoughLaplacian, SecondOrderConvergence) {
  double prev = 0;
  for (int N : {64, 128, 256, 512}) {
    auto line = unit_line(N, 2.0);
    auto V1 = sine_field(line);
    double lam = std::pow(M_PI, 2);
    double err = max_err(rough_laplacian(V1, 1).vectors, lam * V1.vectors);
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.8);
    prev = err;
  }
}

TEST(RoughLaplacian, FourthOrderStencil) {
  double prev = 0;
  for (int N : {32, 64, 128}) {
    auto line = unit_line(N, 2.0).with_difference_order(4);
    auto V1 = sine_field(line);
    double err = max_err(rough_laplacian(V1, 1).vectors, M_PI * M_PI * V1.vectors);
    if (prev > 0) EXPECT_NEAR(prev / err, 16.0, 3.2);
    prev = err;
  }
}

TEST(Integrate, Examples) {
  auto dom = Domain<double>::closed_curve(2 * M_PI, 64);
  EXPECT_NEAR(integrate_scalar(dom, V::Ones(64)), 2 * M_PI, 1e-14);
  V s2(64);
  for (int i = 0; i < 64; ++i) s2(i) = std::pow(std::sin(dom.position(i, 0)), 2);
  EXPECT_NEAR(integrate_scalar(dom, s2), M_PI, 1e-10);
  EXPECT_EQ(integrate_scalar(dom, V::Zero(64)), 0.0);
  EXPECT_THROW(integrate_scalar(dom, V::Zero(63)), InvalidArgument);
}

TEST(Reparametrize, CircleIsFixedPoint) {
  auto c = circle_map<double>(2, 1.0, 64);
  auto r = reparametrize_arclength(c);
  EXPECT_LE(max_err(r.points(), c.points()), 1e-10);
}

TEST(Reparametrize, EllipseBecomesUnitSpeed) {
  auto e = ellipse_map<double>(2.0, 1.0, 512);
  EXPECT_FALSE(is_isometric_immersion(e));
  auto r = reparametrize_arclength(e);
  EXPECT_LE(isometry_defect(r), 1e-6);
  EXPECT_TRUE(is_isometric_immersion(r));
}

TEST(Reparametrize, CollapsedCurveIsDegenerate) {
  auto c = constant_map(Space::euclidean(2), vec({1, 1}), 1.0, 16);
  EXPECT_THROW(reparametrize_arclength(c), DegenerateInput);
}

TEST(Reparametrize, TorusRejected) {
  EXPECT_THROW(reparametrize_arclength(clifford_torus<double>(16)), InvalidArgument);
}

// Discrete integration by parts for the covariant derivative.
TEST(DiscreteCalculus, IntegrationByParts) {
  for (auto space : {Space::euclidean(3), Space::sphere(2), Space::hyperbolic(2)}) {
    RandomCurveSpec spec;
    spec.base = RandomCurveSpec::Base::Loop;
    spec.samples = 256;
    auto m = random_closed_curve(space, spec);
    auto V1 = random_section(m, 3, 1.0, 5);
    auto W1 = random_section(m, 3, 1.0, 6);
    double lhs = integrate_scalar(m.domain(), pointwise_inner(covariant_derivative(V1, 0), W1)) +
                 integrate_scalar(m.domain(), pointwise_inner(V1, covariant_derivative(W1, 0)));
    double h = m.domain().spacing(0);
    EXPECT_LE(std::abs(lhs), 50 * h * h);
    double pos = integrate_scalar(m.domain(), pointwise_inner(rough_laplacian(V1, 1), V1));
    EXPECT_GE(pos, -50 * h * h);
  }
}

TEST(DiscreteCalculus, TorusHarmonicMap) {
  auto t = clifford_torus<double>(64);
  EXPECT_LE(isometry_defect(t), 1.0);
  // Clifford torus is harmonic (minimal, conformal).
  SectionField<double> tau = zero_field(t);
  for (int a = 0; a < 2; ++a) tau += covariant_derivative(dphi(t, a), a);
  EXPECT_LE(tau.sup_norm(), 1e-2);
}
