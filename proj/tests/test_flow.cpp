#include <cmath>

#include <gtest/gtest.h>

#include "kharm/curves.hpp"
#include "kharm/flow.hpp"
#include "kharm/precision.hpp"

using namespace kharm;
using V = Vec<double>;
using Space = ModelSpace<double>;

TEST(FlowStep, HarmonicInputUnchanged) {
  V a1(2), a0(2);
  // Dyadic samples: every difference is exact, so tau_k is exactly zero.
  a1 << 1, 0;
  a0 << 1, -1;
  auto line = line_map<double>(a1, a0, 4.0, 32);
  auto out = flow_step(line, 2, 1e-3);
  EXPECT_EQ(out.points(), line.points());
}

TEST(FlowStep, CircleBienergyDecreases) {
  auto c = circle_map<double>(2, 1.0, 64);
  auto st = flow_step_detailed(c, 2, 1e-4);
  EXPECT_LT(st.energy_after, st.energy_before);
  EXPECT_GT(st.step, 0.0);
  // On the fixed domain (L = 2 pi) E_2 = pi r^2, so the sampled circle shrinks.
  EXPECT_LT(st.map.points().col(0).norm(), 1.0);
}

TEST(FlowStep, SphereEnergyDecreases) {
  RandomCurveSpec spec;
  spec.samples = 64;
  auto m = random_closed_curve(Space::sphere(2), spec);  // perturbed great circle
  auto st = flow_step_detailed(m, 1, 1e-2);
  EXPECT_LT(st.energy_after, st.energy_before);
}

TEST(FlowStep, Validation) {
  auto c = circle_map<double>(2, 1.0, 16);
  EXPECT_THROW(flow_step(c, 2, 0.0), InvalidArgument);
  EXPECT_THROW(flow_step(c, 0, 1e-3), InvalidArgument);
}

TEST(FlowStep, StallsWhenNoStepDecreases) {
  // 2^-30 of this step still overshoots the stiff E_6 flow.
  auto c = circle_map<double>(2, 1.0, 256);
  EXPECT_THROW(flow_step(c, 6, 1e12), StalledStep);
}

TEST(RunFlow, StraightLineConvergesImmediately) {
  V a1(3), a0(3);
  a1 << 0, 0, 1;
  a0 << 1, 2, 3;
  auto line = line_map<double>(a1, a0, 2.0, 32);
  for (int k = 1; k <= 4; ++k) {
    FlowConfig cfg;
    cfg.k = k;
    auto rep = run_flow(line, cfg);
    EXPECT_EQ(rep.iterations, 0);
    EXPECT_EQ(rep.verdict, FlowVerdict::ConvergedHarmonic);
  }
}

TEST(RunFlow, EnergyMonotoneAndDescent) {
  auto m = perturbed_geodesic(Space::hyperbolic(2), 32, 3);
  FlowConfig cfg;
  cfg.k = 2;
  cfg.step = 1e-2;
  cfg.growth = 1.1;
  cfg.max_iters = 300;
  int checked = 0;
  auto rep = run_flow<double>(m, cfg, [&](const StepResult<double>& st) {
    EXPECT_LE(st.energy_after, st.energy_before * (1 + kEnergySlack));
    EXPECT_GT(st.descent_rate, 0.0);
    ++checked;
  });
  EXPECT_EQ(checked, rep.iterations);
  for (std::size_t i = 1; i < rep.energy.size(); ++i)
    EXPECT_LE(rep.energy[i], rep.energy[i - 1] * (1 + kEnergySlack));
}

TEST(RunFlow, HyperbolicBiharmonicFlowReachesHarmonicMap) {
  auto m = perturbed_geodesic(Space::hyperbolic(2), 32, 5);
  FlowConfig cfg;
  cfg.k = 2;
  cfg.step = 1e-2;
  cfg.growth = 1.1;
  cfg.max_iters = 20000;
  auto rep = run_flow(m, cfg);
  EXPECT_EQ(rep.verdict, FlowVerdict::ConvergedHarmonic);
  EXPECT_LT(rep.tau_sup, 1e-2);
}

TEST(RunFlow, ReparametrizationKeepsUnitSpeed) {
  auto e = ellipse_map<double>(1.2, 1.0, 64);
  FlowConfig cfg;
  cfg.k = 2;
  cfg.step = 1e-4;
  cfg.max_iters = 10;
  cfg.reparam_every = 5;
  auto rep = run_flow(e, cfg);
  EXPECT_EQ(rep.iterations, 10);
  EXPECT_LE(isometry_defect(rep.map), 1e-3);
}

TEST(RunFlow, Validation) {
  auto c = circle_map<double>(2, 1.0, 16);
  FlowConfig cfg;
  cfg.stop_tol = 0;
  EXPECT_THROW(run_flow(c, cfg), InvalidArgument);
  cfg = FlowConfig{};
  cfg.step = -1;
  EXPECT_THROW(run_flow(c, cfg), InvalidArgument);
}

TEST(Verdict, ProperRequiresLargeTension) {
  EXPECT_EQ(classify_flow_state(1e-4, 1.0, 1e-3), FlowVerdict::ConvergedProperKHarmonic);
  EXPECT_EQ(classify_flow_state(1e-4, 5e-3, 1e-3), FlowVerdict::ConvergedHarmonic);
  EXPECT_EQ(classify_flow_state(1e-2, 1.0, 1e-3), FlowVerdict::MaxIters);
}

TEST(CircleSearch, UnitSphere) {
  auto S2 = ModelSpace<quad>::sphere(2);
  quad z = biharmonic_circle_search(S2, 1024);
  EXPECT_NEAR(to_double(z), 1 / std::sqrt(2.0), 1e-3);
  auto rep = k_tension(latitude_circle(S2, z, 1024), 2);
  EXPECT_LT(to_double(rep.sup_norm), 1e-8);
}

TEST(CircleSearch, ScaleCovariance) {
  auto S2 = ModelSpace<quad>::sphere(2, quad(4));
  EXPECT_NEAR(to_double(biharmonic_circle_search(S2, 512)), 1 / (2 * std::sqrt(2.0)), 1e-3);
}

TEST(CircleSearch, ThreeResolutionsAgree) {
  auto S2 = Space::sphere(2);
  for (int N : {64, 128, 256}) EXPECT_NEAR(biharmonic_circle_search(S2, N), 1 / std::sqrt(2.0), 1e-3);
}

TEST(CircleSearch, Validation) {
  EXPECT_THROW(biharmonic_circle_search(Space::sphere(3), 64), InvalidArgument);
  EXPECT_THROW(biharmonic_circle_search(Space::hyperbolic(2), 64), InvalidArgument);
}

// Within the latitude family on a fixed domain E_2 ~ z^2 (1 - z^2), so the
// proper biharmonic circle is a maximum and descent moves away from it.
TEST(LatitudeFamily, BiharmonicCircleIsAnEnergyMaximum) {
  auto S2 = Space::sphere(2);
  double z = 1 / std::sqrt(2.0), L = 2 * M_PI;
  double e = latitude_energy(S2, z, 128, L);
  EXPECT_GT(e, latitude_energy(S2, z - 0.05, 128, L));
  EXPECT_GT(e, latitude_energy(S2, z + 0.05, 128, L));
  auto trace = latitude_family_descent(S2, z + 0.01, 128, L, 0.05, 200);
  EXPECT_GT(std::abs(trace.back() - z), 0.1);
}
