#pragma once

// L2 gradient flow of E_k with backtracking, and the root search that
// produces the proper biharmonic latitude circle on S^2.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "kharm/curves.hpp"
#include "kharm/ktension.hpp"

namespace kharm {

struct FlowConfig {
  int k = 2;
  double step = 1e-3;
  int max_iters = 1000;
  double stop_tol = 1e-3;
  int reparam_every = 0;  // 0 = never
  std::uint64_t seed = 1;
  // Grow the step by this factor after every accepted step (1 = fixed step).
  double growth = 1.0;
};

enum class FlowVerdict { ConvergedHarmonic, ConvergedProperKHarmonic, MaxIters };

inline std::string_view to_string(FlowVerdict v) {
  switch (v) {
    case FlowVerdict::ConvergedHarmonic: return "converged_harmonic";
    case FlowVerdict::ConvergedProperKHarmonic: return "converged_proper_k_harmonic";
    case FlowVerdict::MaxIters: return "max_iters";
  }
  return "?";
}

template <class S>
struct FlowReport {
  int iterations = 0;
  std::vector<double> energy;  // energy[i] = E_k after i accepted steps
  double tau_sup = 0;
  double tau_k_sup = 0;
  FlowVerdict verdict = FlowVerdict::MaxIters;
  DiscreteMap<S> map;
  // Step actually used by the last accepted step.
  double last_step = 0;
};

template <class S>
struct StepResult {
  DiscreteMap<S> map;
  S step{};
  S energy_before{};
  S energy_after{};
  // int <tau_k, tau_k>: the first-order energy decrease rate along the step.
  S descent_rate{};
};

inline constexpr int kMaxHalvings = 30;
inline constexpr double kEnergySlack = 1e-12;

namespace detail {

// Backtracking along a precomputed direction with known starting energy.
template <class S>
StepResult<S> backtrack(const DiscreteMap<S>& map, int k, const SectionField<S>& dir, const S& e0,
                        S h_t) {
  StepResult<S> out{map, S(0), e0, e0, integrate_scalar(map.domain(), pointwise_inner(dir, dir))};
  if (dir.sup_norm() == S(0)) return out;
  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    DiscreteMap<S> next = perturb(map, dir, h_t);
    S e1 = energy_k(next, k);
    if (e1 <= e0 * (S(1) + S(kEnergySlack))) {
      out.map = std::move(next);
      out.step = h_t;
      out.energy_after = e1;
      return out;
    }
    h_t /= S(2);
  }
  throw StalledStep("energy E_" + std::to_string(k) + " did not decrease after " +
                    std::to_string(kMaxHalvings) + " step halvings");
}

}  // namespace detail

/// One explicit step p <- exp_p(h tau_k(p)), halving h until E_k does not
/// increase beyond relative slack 1e-12. Throws StalledStep after 30 halvings.
template <class S>
StepResult<S> flow_step_detailed(const DiscreteMap<S>& map, int k, S h_t) {
  if (!(h_t > S(0))) throw InvalidArgument("flow step must be positive");
  if (k < 1) throw InvalidArgument("flow needs k >= 1");
  TensionTower<S> tower(map);
  SectionField<S> dir = k_tension_field(tower, k);
  return detail::backtrack(map, k, dir, energy_k(tower, k), h_t);
}

template <class S>
DiscreteMap<S> flow_step(const DiscreteMap<S>& map, int k, S h_t) {
  return flow_step_detailed(map, k, h_t).map;
}

template <class S>
FlowVerdict classify_flow_state(const S& tau_k_sup, const S& tau_sup, double stop_tol) {
  if (!(tau_k_sup < S(stop_tol))) return FlowVerdict::MaxIters;
  return tau_sup > S(10 * stop_tol) ? FlowVerdict::ConvergedProperKHarmonic
                                    : FlowVerdict::ConvergedHarmonic;
}

/// Iterates flow_step until sup|tau_k| < stop_tol or max_iters. The optional
/// observer sees every accepted step.
template <class S>
FlowReport<S> run_flow(const DiscreteMap<S>& start, const FlowConfig& cfg,
                       const std::function<void(const StepResult<S>&)>& observer = {}) {
  if (cfg.k < 1) throw InvalidArgument("flow needs k >= 1");
  if (!(cfg.step > 0)) throw InvalidArgument("flow step must be positive");
  if (!(cfg.stop_tol > 0)) throw InvalidArgument("stop tolerance must be positive");
  if (cfg.max_iters < 0) throw InvalidArgument("max_iters must be non-negative");
  if (cfg.reparam_every < 0) throw InvalidArgument("reparam_every must be non-negative");
  if (!(cfg.growth >= 1)) throw InvalidArgument("step growth must be >= 1");

  FlowReport<S> rep{0, {}, 0, 0, FlowVerdict::MaxIters, start, 0};
  S h(cfg.step);
  // Direction, energy and norms of the current iterate, from one tower.
  std::optional<SectionField<S>> dir;
  S tau_sup, tau_k_sup, energy;
  auto measure = [&] {
    TensionTower<S> tower(rep.map);
    tau_sup = tower.tau().sup_norm();
    dir = k_tension_field(tower, cfg.k);
    tau_k_sup = dir->sup_norm();
    energy = energy_k(tower, cfg.k);
  };
  measure();
  rep.energy.push_back(to_double(energy));

  while (rep.iterations < cfg.max_iters && !(tau_k_sup < S(cfg.stop_tol))) {
    StepResult<S> st = detail::backtrack(rep.map, cfg.k, *dir, energy, h);
    if (observer) observer(st);
    rep.map = std::move(st.map);
    rep.last_step = to_double(st.step);
    ++rep.iterations;
    h = std::min(S(st.step) * S(cfg.growth), S(cfg.step) * S(1e6));
    if (h == S(0)) h = S(cfg.step);
    if (cfg.reparam_every > 0 && rep.iterations % cfg.reparam_every == 0)
      rep.map = reparametrize_arclength(rep.map);
    measure();
    rep.energy.push_back(to_double(energy));
  }
  rep.tau_sup = to_double(tau_sup);
  rep.tau_k_sup = to_double(tau_k_sup);
  rep.verdict = classify_flow_state(tau_k_sup, tau_sup, cfg.stop_tol);
  return rep;
}

/// Perturbed geodesic used by the non-positive curvature experiments:
/// modes up to N/8, amplitude 0.1, seeded.
template <class S>
DiscreteMap<S> perturbed_geodesic(const ModelSpace<S>& space, int samples, std::uint64_t seed,
                                  double amplitude = 0.1) {
  RandomCurveSpec spec;
  spec.base = RandomCurveSpec::Base::Geodesic;
  spec.samples = samples;
  spec.max_mode = std::max(1, samples / 8);
  spec.amplitude = amplitude;
  spec.seed = seed;
  return random_closed_curve(space, spec);
}

/// Signed bitension of the latitude circle z = z0: <tau_2, tau>/|tau| at one
/// sample (the family is rotationally symmetric, so every sample agrees).
template <class S>
S latitude_bitension(const ModelSpace<S>& sphere, S z0, int samples) {
  using std::sqrt;
  DiscreteMap<S> c = latitude_circle(sphere, z0, samples);
  TensionTower<S> tower(c);
  SectionField<S> t2 = k_tension_field(tower, 2);
  const auto& tau = tower.tau();
  S tn = sphere.norm(tau.at(0));
  if (tn == S(0)) return S(0);
  return sphere.inner(t2.at(0), tau.at(0)) / tn;
}

/// Root of the signed bitension over latitude circles z0 in [0.1 R, 0.95 R]
/// (the equator, a trivial harmonic root, is excluded). Returns z0*.
/// The bracket is carried in double (resolution ~1e-16 R); the bitension
/// itself is evaluated in S.
template <class S>
S biharmonic_circle_search(const ModelSpace<S>& sphere, int samples = 1024) {
  if (sphere.kind() != SpaceKind::Sphere || sphere.dim() != 2)
    throw InvalidArgument("biharmonic circle search needs the 2-sphere");
  const double R = to_double(sphere.radius());
  double lo = 0.1 * R, hi = 0.95 * R;
  auto f = [&](double z) { return to_double(latitude_bitension(sphere, S(z), samples)); };
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return S(lo);
  if (fhi == 0) return S(hi);
  if ((flo > 0) == (fhi > 0))
    throw SearchFailure("signed bitension has no sign change on [0.1R, 0.95R]");
  const double width = 1e-14 * R;
  auto tol = [&](double a, double b) { return std::abs(b - a) <= width; };
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= 200) throw SearchFailure("root search did not converge");
  return S((a + b) / 2);
}

/// Signed E_2 of the latitude family (fixed domain length, uniform speed),
/// for the symmetric-family descent experiment.
template <class S>
S latitude_energy(const ModelSpace<S>& sphere, S z0, int samples, S length) {
  DiscreteMap<S> c = latitude_circle(sphere, z0, samples);
  // Same image on a domain of the requested length.
  DiscreteMap<S> d(Domain<S>::closed_curve(length, samples), sphere, c.points());
  return energy_k(d, 2);
}

/// Gradient descent of E_2 restricted to latitude circles on a fixed domain.
/// Returns the z0 trace. Because E_2 is maximal at the proper biharmonic
/// circle within this family, descent leaves it for the equator or the pole.
template <class S>
std::vector<double> latitude_family_descent(const ModelSpace<S>& sphere, S z0, int samples,
                                            S length, S step, int iters) {
  using std::abs;
  const S R = sphere.radius();
  std::vector<double> trace{to_double(z0)};
  const S dz = S(1e-6) * R;
  for (int i = 0; i < iters; ++i) {
    S lo = std::max(z0 - dz, S(-R) + dz), hi = std::min(z0 + dz, R - dz);
    S g = (latitude_energy(sphere, hi, samples, length) - latitude_energy(sphere, lo, samples, length)) /
          (hi - lo);
    S next = z0 - step * g;
    next = std::clamp(next, S(0), R * S(0.999));
    if (abs(next - z0) < S(1e-15) * R) break;
    z0 = next;
    trace.push_back(to_double(z0));
  }
  return trace;
}

}  // namespace kharm
