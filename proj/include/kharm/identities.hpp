#pragma once

// Numerical instantiation of the constant-curvature identities satisfied by
// biharmonic isometric immersions, and of the Bochner-type formula for the
// Laplacian of the 4-energy density.

#include <algorithm>
#include <cmath>
#include <string>

#include "kharm/ktension.hpp"

namespace kharm {

/// Outcome of one identity check. `passed` iff residual <= tol * max(1, scale).
/// `tau2_sup` is sup|tau_2| of the input, so a failed hypothesis (map not
/// biharmonic) can be told apart from a failed identity.
struct IdentityReport {
  std::string name;
  double residual = 0;
  double scale = 0;
  double tol = 0;
  double tau2_sup = 0;
  bool passed = false;
  // Bochner check only: |integral of Delta e_4| and its bound.
  double integrated = 0;
  double integrated_tol = 0;
};

/// Default tolerance by number of rough Laplacian applications involved:
/// 1e-3 up to two, 1e-2 for three or four, 5e-2 for five or six.
inline double identity_tolerance(int laplacians) {
  if (laplacians <= 2) return 1e-3;
  if (laplacians <= 4) return 1e-2;
  return 5e-2;
}

namespace detail {

template <class S>
IdentityReport finish_report(std::string name, const S& residual, const S& scale, double tol,
                             TensionTower<S>& tower) {
  IdentityReport r;
  r.name = std::move(name);
  r.residual = to_double(residual);
  r.scale = to_double(scale);
  r.tol = tol;
  r.tau2_sup = to_double(k_tension_field(tower, 2).sup_norm());
  r.passed = r.residual <= tol * std::max(1.0, r.scale);
  return r;
}

template <class S>
void require_isometric(const DiscreteMap<S>& map) {
  S defect = isometry_defect(map);
  if (defect > S(kIsometryTol))
    throw PreconditionViolation("map is not an isometric immersion (speed defect " +
                                std::to_string(to_double(defect)) + ")");
}

template <class S>
S integer_power(S base, int e) {
  S out(1);
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace detail

/// Biharmonic isometric immersions into curvature K satisfy
/// Delta-bar tau = K m tau. Residual sup|Delta-bar tau - K m tau|.
template <class S>
IdentityReport check_prop_3_1(const DiscreteMap<S>& map, double tol = identity_tolerance(1)) {
  detail::require_isometric(map);
  TensionTower<S> tower(map);
  const S Km = map.space().curvature() * S(map.domain().axes());
  SectionField<S> rhs = Km * tower.tau();
  SectionField<S> diff = tower.lap(1) - rhs;
  S scale = std::max(tower.lap(1).sup_norm(), rhs.sup_norm());
  return detail::finish_report("bitension_eigen_relation", diff.sup_norm(), scale, tol, tower);
}

/// <dphi(e_i), Delta-bar^l tau> = 0 for biharmonic isometric immersions.
/// Residual max over samples and axes.
template <class S>
IdentityReport check_lemma_3_2(const DiscreteMap<S>& map, int l, double tol = -1) {
  using std::abs;
  if (l < 0) throw InvalidArgument("Laplacian power must be non-negative");
  detail::require_isometric(map);
  if (tol < 0) tol = identity_tolerance(l);
  TensionTower<S> tower(map);
  const auto& f = tower.lap(l);
  S worst(0), scale(0);
  for (int a = 0; a < tower.axes(); ++a) {
    Vec<S> ip = pointwise_inner(tower.dphi_axis(a), f);
    for (int i = 0; i < ip.size(); ++i) worst = std::max(worst, S(abs(ip(i))));
  }
  scale = f.sup_norm();
  return detail::finish_report("tangent_orthogonality l=" + std::to_string(l), worst, scale, tol,
                               tower);
}

/// sum_i <dphi(e_i), nabla-bar_{e_i} Delta-bar^l tau> = -(mK)^l |tau|^2 for
/// biharmonic isometric immersions. Residual max over samples.
template <class S>
IdentityReport check_lemma_3_3(const DiscreteMap<S>& map, int l, double tol = -1) {
  using std::abs;
  if (l < 0) throw InvalidArgument("Laplacian power must be non-negative");
  detail::require_isometric(map);
  if (tol < 0) tol = identity_tolerance(l);
  TensionTower<S> tower(map);
  const S mK = map.space().curvature() * S(map.domain().axes());
  const S factor = detail::integer_power(mK, l);
  Vec<S> lhs = Vec<S>::Zero(map.size());
  for (int a = 0; a < tower.axes(); ++a)
    lhs += pointwise_inner(tower.dphi_axis(a), tower.grad(l, a));
  Vec<S> tau_sq = pointwise_inner(tower.tau(), tower.tau());
  S worst(0), scale(0);
  for (int i = 0; i < map.size(); ++i) {
    worst = std::max(worst, S(abs(lhs(i) + factor * tau_sq(i))));
    scale = std::max(scale, S(abs(factor * tau_sq(i))));
  }
  return detail::finish_report("tangent_derivative_pairing l=" + std::to_string(l), worst, scale,
                               tol, tower);
}

namespace detail {

template <class S>
IdentityReport check_collapse(const DiscreteMap<S>& map, int k, const S& coefficient,
                              std::string name, double tol) {
  TensionTower<S> tower(map);
  SectionField<S> full = k_tension_field(tower, k);
  Vec<S> tau_sq = pointwise_inner(tower.tau(), tower.tau());
  SectionField<S> closed = tower.tau();
  for (int i = 0; i < map.size(); ++i) closed.vectors.col(i) *= coefficient * tau_sq(i);
  SectionField<S> diff = full - closed;
  S scale = std::max(full.sup_norm(), closed.sup_norm());
  return finish_report(std::move(name), diff.sup_norm(), scale, tol, tower);
}

}  // namespace detail

/// For a biharmonic isometric immersion into K != 0 the full tau_{2s}
/// collapses to -2(s-1) K (mK)^{2s-3} |tau|^2 tau.
template <class S>
IdentityReport check_theorem_3_4(const DiscreteMap<S>& map, int s, double tol = -1) {
  if (s < 2) throw InvalidArgument("even-order collapse needs s >= 2");
  const S K = map.space().curvature();
  if (K == S(0)) throw InvalidArgument("even-order collapse needs K != 0");
  detail::require_isometric(map);
  if (tol < 0) tol = identity_tolerance(2 * s - 1);
  const S mK = K * S(map.domain().axes());
  const S coef = S(-2 * (s - 1)) * K * detail::integer_power(mK, 2 * s - 3);
  return detail::check_collapse(map, 2 * s, coef, "even_order_collapse s=" + std::to_string(s),
                                tol);
}

/// Odd analogue: tau_{2s+1} collapses to -(2s-1) K (mK)^{2s-2} |tau|^2 tau.
template <class S>
IdentityReport check_theorem_3_5(const DiscreteMap<S>& map, int s, double tol = -1) {
  if (s < 1) throw InvalidArgument("odd-order collapse needs s >= 1");
  const S K = map.space().curvature();
  if (K == S(0)) throw InvalidArgument("odd-order collapse needs K != 0");
  detail::require_isometric(map);
  if (tol < 0) tol = identity_tolerance(2 * s);
  const S mK = K * S(map.domain().axes());
  const S coef = S(-(2 * s - 1)) * K * detail::integer_power(mK, 2 * s - 2);
  return detail::check_collapse(map, 2 * s + 1, coef, "odd_order_collapse s=" + std::to_string(s),
                                tol);
}

/// Scalar Laplacian sum_a d^2 f / dx_a^2 built from the domain's central
/// first-derivative stencil applied twice (the same discretization as the
/// rough Laplacian). Note the sign: this is the analyst's Laplacian, under
/// which the 4-energy Bochner formula below holds.
template <class S>
Vec<S> scalar_laplacian(const Domain<S>& dom, const Vec<S>& f) {
  const auto weights = detail::central_weights<S>(dom.difference_order());
  auto diff = [&](const Vec<S>& g, int axis) {
    Vec<S> out(g.size());
    const S inv = S(1) / dom.spacing(axis);
    for (int i = 0; i < dom.size(); ++i) {
      S d(0);
      for (const auto& [j, w] : weights)
        d += w * (g(dom.neighbor(i, axis, j)) - g(dom.neighbor(i, axis, -j)));
      out(i) = d * inv;
    }
    return out;
  };
  Vec<S> acc = Vec<S>::Zero(f.size());
  for (int a = 0; a < dom.axes(); ++a) acc += diff(diff(f, a), a);
  return acc;
}

/// Pointwise check of
///   Delta e_4 = |nabla-bar Delta-bar tau|^2 - <Delta-bar^2 tau, Delta-bar tau>,
/// e_4 = 1/2 |Delta-bar tau|^2, plus the closed-domain integral of Delta e_4,
/// which telescopes to zero (bound 1e-10 N).
template <class S>
IdentityReport check_bochner_e4(const DiscreteMap<S>& map, double tol = 1e-3) {
  using std::abs;
  TensionTower<S> tower(map);
  const auto& W = tower.lap(1);
  Vec<S> e4 = S(0.5) * pointwise_inner(W, W);
  Vec<S> lhs = scalar_laplacian(map.domain(), e4);
  Vec<S> grad_sq = Vec<S>::Zero(map.size());
  for (int a = 0; a < tower.axes(); ++a) grad_sq += pointwise_inner(tower.grad(1, a), tower.grad(1, a));
  Vec<S> rhs = grad_sq - pointwise_inner(tower.lap(2), W);
  S worst(0), scale(0);
  for (int i = 0; i < map.size(); ++i) {
    worst = std::max(worst, S(abs(lhs(i) - rhs(i))));
    scale = std::max({scale, S(abs(lhs(i))), S(abs(grad_sq(i)))});
  }
  IdentityReport r = detail::finish_report("fourth_energy_bochner", worst, scale, tol, tower);
  r.integrated = to_double(abs(integrate_scalar(map.domain(), lhs)));
  r.integrated_tol = 1e-10 * map.size();
  r.passed = r.passed && r.integrated <= r.integrated_tol;
  return r;
}

/// Integrated terms of the Green's-theorem form of the Bochner formula for a
/// 3-harmonic map:
///   T1 = |nabla-bar Delta-bar tau|^2, T2 = -<R(Delta-bar tau, dphi_i) dphi_i, Delta-bar tau>,
///   T3 = -K |tau|^2 |nabla-bar tau|^2,
/// with their pointwise minima (all three are pointwise >= 0 when K <= 0).
template <class S>
struct BochnerTerms {
  S t1{}, t2{}, t3{};
  S min_t1{}, min_t2{}, min_t3{};
};

template <class S>
BochnerTerms<S> bochner_terms(const DiscreteMap<S>& map) {
  TensionTower<S> tower(map);
  const auto& space = map.space();
  const S K = space.curvature();
  const auto& W = tower.lap(1);
  Vec<S> t1 = Vec<S>::Zero(map.size()), t2 = Vec<S>::Zero(map.size());
  Vec<S> grad_tau_sq = Vec<S>::Zero(map.size());
  for (int a = 0; a < tower.axes(); ++a) {
    t1 += pointwise_inner(tower.grad(1, a), tower.grad(1, a));
    grad_tau_sq += pointwise_inner(tower.grad(0, a), tower.grad(0, a));
    const auto& D = tower.dphi_axis(a);
    for (int i = 0; i < map.size(); ++i)
      t2(i) -= space.inner(space.curvature_apply(W.at(i), D.at(i), D.at(i)), W.at(i));
  }
  Vec<S> t3 = -K * pointwise_inner(tower.tau(), tower.tau()).cwiseProduct(grad_tau_sq);
  BochnerTerms<S> out;
  out.t1 = integrate_scalar(map.domain(), t1);
  out.t2 = integrate_scalar(map.domain(), t2);
  out.t3 = integrate_scalar(map.domain(), t3);
  out.min_t1 = t1.minCoeff();
  out.min_t2 = t2.minCoeff();
  out.min_t3 = t3.minCoeff();
  return out;
}

}  // namespace kharm
