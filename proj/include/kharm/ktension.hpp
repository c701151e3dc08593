#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "kharm/discrete_map.hpp"

namespace kharm {

/// Tension field tau(phi) = sum_i nabla-bar_{e_i} dphi(e_i) (flat domain).
template <class S>
SectionField<S> tension(const DiscreteMap<S>& map) {
  SectionField<S> tau = zero_field(map);
  for (int a = 0; a < map.domain().axes(); ++a) tau += covariant_derivative(dphi(map, a), a);
  return tau;
}

/// Lazily built tower of the fields that every k-tension and k-energy is
/// assembled from: dphi(e_i), Delta-bar^j tau and nabla-bar_{e_i} Delta-bar^j tau.
/// Delta-bar^{-1} tau is the zero field.
template <class S>
class TensionTower {
 public:
  explicit TensionTower(const DiscreteMap<S>& map) : map_(&map) {
    for (int a = 0; a < map.domain().axes(); ++a) dphi_.push_back(dphi(map, a));
    SectionField<S> tau = zero_field(map);
    for (int a = 0; a < map.domain().axes(); ++a) tau += covariant_derivative(dphi_[a], a);
    laplacians_.push_back(std::move(tau));
  }

  const DiscreteMap<S>& map() const { return *map_; }
  int axes() const { return map_->domain().axes(); }
  const SectionField<S>& dphi_axis(int a) const { return dphi_[a]; }
  const SectionField<S>& tau() const { return laplacians_.front(); }

  /// Delta-bar^j tau for j >= -1.
  const SectionField<S>& lap(int j) {
    if (j < -1) throw InvalidArgument("negative Laplacian power below -1");
    if (j == -1) {
      if (!zero_) zero_ = zero_field(*map_);
      return *zero_;
    }
    while (static_cast<int>(laplacians_.size()) <= j)
      laplacians_.push_back(rough_laplacian(laplacians_.back(), 1));
    return laplacians_[j];
  }

  /// nabla-bar_{e_a} Delta-bar^j tau.
  const SectionField<S>& grad(int j, int a) {
    auto key = std::make_pair(j, a);
    auto it = gradients_.find(key);
    if (it != gradients_.end()) return it->second;
    SectionField<S> g = covariant_derivative(lap(j), a);
    return gradients_.emplace(key, std::move(g)).first->second;
  }

 private:
  const DiscreteMap<S>* map_;
  std::vector<SectionField<S>> dphi_;
  std::deque<SectionField<S>> laplacians_;
  std::map<std::pair<int, int>, SectionField<S>> gradients_;
  std::optional<SectionField<S>> zero_;
};

/// k-energy. E_1 = 1/2 int |dphi|^2, E_{2s} = 1/2 int |Delta-bar^{s-1} tau|^2,
/// E_{2s+1} = 1/2 int sum_i |nabla-bar_{e_i} Delta-bar^{s-1} tau|^2.
template <class S>
S energy_k(TensionTower<S>& tower, int k) {
  if (k < 1) throw InvalidArgument("k-energy needs k >= 1");
  const auto& map = tower.map();
  Vec<S> density = Vec<S>::Zero(map.size());
  if (k == 1) {
    for (int a = 0; a < tower.axes(); ++a)
      density += pointwise_inner(tower.dphi_axis(a), tower.dphi_axis(a));
  } else if (k % 2 == 0) {
    const auto& f = tower.lap(k / 2 - 1);
    density = pointwise_inner(f, f);
  } else {
    int s = (k - 1) / 2;
    for (int a = 0; a < tower.axes(); ++a) {
      const auto& g = tower.grad(s - 1, a);
      density += pointwise_inner(g, g);
    }
  }
  return S(0.5) * integrate_scalar(map.domain(), density);
}

template <class S>
S energy_k(const DiscreteMap<S>& map, int k) {
  TensionTower<S> tower(map);
  return energy_k(tower, k);
}

/// tau_k split into its pure Laplacian part Delta-bar^{k-1} tau and the part
/// built from curvature terms; tau_k = laplacian + curvature.
template <class S>
struct KTensionParts {
  SectionField<S> laplacian;
  SectionField<S> curvature;
  SectionField<S> total() const { return laplacian + curvature; }
};

namespace detail {

// acc -= sum_a R(X_a, Y_a) dphi_a, pointwise, with curvature constant K.
template <class S, class FX, class FY>
void subtract_curvature_sum(Mat<S>& acc, TensionTower<S>& tower, const S& K, FX&& x_of,
                            FY&& y_of) {
  const auto& space = tower.map().space();
  if (K == S(0)) return;
  for (int a = 0; a < tower.axes(); ++a) {
    const SectionField<S>& X = x_of(a);
    const SectionField<S>& Y = y_of(a);
    const SectionField<S>& D = tower.dphi_axis(a);
    for (int i = 0; i < tower.map().size(); ++i)
      acc.col(i) -= space.curvature_apply(X.at(i), Y.at(i), D.at(i), K);
  }
}

}  // namespace detail

/// Euler-Lagrange operator of E_k, evaluated with curvature constant K
/// (normally the target's own). Repeated frame indices sum over domain axes.
///
/// k = 2s:
///   tau_2s = Db^{2s-1} tau - R(Db^{2s-2} tau, dphi_j) dphi_j
///          - sum_{l=1}^{s-1} { R(nb_j Db^{s+l-2} tau, Db^{s-l-1} tau) dphi_j
///                            - R(Db^{s+l-2} tau, nb_j Db^{s-l-1} tau) dphi_j }
/// k = 2s+1:
///   tau_2s+1 = Db^{2s} tau - R(Db^{2s-1} tau, dphi_j) dphi_j
///          - sum_{l=1}^{s-1} { R(nb_j Db^{s+l-1} tau, Db^{s-l-1} tau) dphi_j
///                            - R(Db^{s+l-1} tau, nb_j Db^{s-l-1} tau) dphi_j }
///          - R(nb_i Db^{s-1} tau, Db^{s-1} tau) dphi_i
/// with Db^{-1} = 0, so k = 1 gives tau and k = 2 gives Jiang's bitension.
template <class S>
KTensionParts<S> k_tension_parts(TensionTower<S>& tower, int k, const S& K) {
  if (k < 1) throw InvalidArgument("k-tension needs k >= 1");
  const auto& map = tower.map();
  Mat<S> curv = Mat<S>::Zero(map.space().ambient_dim(), map.size());
  const bool even = k % 2 == 0;
  const int s = even ? k / 2 : (k - 1) / 2;
  // Offset between the two Laplacian powers in the l-sum: s+l-2 (even), s+l-1 (odd).
  const int shift = even ? -2 : -1;

  detail::subtract_curvature_sum(
      curv, tower, K, [&](int) -> const SectionField<S>& { return tower.lap(k - 2); },
      [&](int a) -> const SectionField<S>& { return tower.dphi_axis(a); });

  for (int l = 1; l <= s - 1; ++l) {
    const int hi = s + l + shift;
    const int lo = s - l - 1;
    detail::subtract_curvature_sum(
        curv, tower, K, [&](int a) -> const SectionField<S>& { return tower.grad(hi, a); },
        [&](int) -> const SectionField<S>& { return tower.lap(lo); });
    Mat<S> plus = Mat<S>::Zero(curv.rows(), curv.cols());
    detail::subtract_curvature_sum(
        plus, tower, K, [&](int) -> const SectionField<S>& { return tower.lap(hi); },
        [&](int a) -> const SectionField<S>& { return tower.grad(lo, a); });
    curv -= plus;
  }

  if (!even && s >= 1) {
    detail::subtract_curvature_sum(
        curv, tower, K, [&](int a) -> const SectionField<S>& { return tower.grad(s - 1, a); },
        [&](int) -> const SectionField<S>& { return tower.lap(s - 1); });
  }

  return {tower.lap(k - 1), SectionField<S>{&map, std::move(curv)}};
}

template <class S>
SectionField<S> k_tension_field(TensionTower<S>& tower, int k) {
  return k_tension_parts(tower, k, tower.map().space().curvature()).total();
}

template <class S>
SectionField<S> k_tension_field(const DiscreteMap<S>& map, int k) {
  TensionTower<S> tower(map);
  return k_tension_field(tower, k);
}

/// tau_k together with E_k and its norms. A k-harmonic map is proper when
/// tau_k vanishes but tau does not.
template <class S>
struct KTensionReport {
  int k = 1;
  S energy{};
  SectionField<S> tau_k;
  S sup_norm{};
  S l2_norm{};
  S tau_sup_norm{};

  bool k_harmonic(double tol) const { return sup_norm <= S(tol); }
  bool harmonic(double tol) const { return tau_sup_norm <= S(tol); }
  bool proper(double tol) const { return k_harmonic(tol) && !harmonic(tol); }
};

template <class S>
KTensionReport<S> k_tension(const DiscreteMap<S>& map, int k) {
  if (k < 1) throw InvalidArgument("k-tension needs k >= 1");
  TensionTower<S> tower(map);
  KTensionReport<S> r;
  r.k = k;
  r.tau_k = k_tension_field(tower, k);
  r.energy = energy_k(tower, k);
  r.sup_norm = r.tau_k.sup_norm();
  r.l2_norm = r.tau_k.l2_norm();
  r.tau_sup_norm = tower.tau().sup_norm();
  return r;
}

/// Jiang's bitension Delta-bar tau - R(tau, dphi_i) dphi_i, written out with
/// the constant-curvature formula directly (no tower, no curvature_apply).
template <class S>
SectionField<S> jiang_bitension(const DiscreteMap<S>& map) {
  const auto& space = map.space();
  SectionField<S> tau = tension(map);
  SectionField<S> out = rough_laplacian(tau, 1);
  const S K = space.curvature();
  for (int a = 0; a < map.domain().axes(); ++a) {
    SectionField<S> d = dphi(map, a);
    for (int i = 0; i < map.size(); ++i) {
      S dd = space.inner(d.at(i), d.at(i));
      S dt = space.inner(d.at(i), tau.at(i));
      out.vectors.col(i) -= K * (dd * tau.at(i) - dt * d.at(i));
    }
  }
  return out;
}

/// Applies phi_t = exp_phi(t V) sample by sample.
template <class S>
DiscreteMap<S> perturb(const DiscreteMap<S>& map, const SectionField<S>& V, const S& t) {
  Mat<S> pts(map.space().ambient_dim(), map.size());
  for (int i = 0; i < map.size(); ++i) pts.col(i) = map.space().exp(map.point(i), Vec<S>(t * V.at(i)));
  return map.with_points(std::move(pts));
}

/// Outcome of comparing a central difference of E_k along phi_t = exp(tV)
/// with the first variation formula dE_k/dt = -int <tau_k, V>.
template <class S>
struct FirstVariation {
  S finite_difference{};
  S predicted{};
  S residual() const {
    using std::abs;
    return abs(finite_difference - predicted);
  }
  // residual / (1 + |dE/dt|)
  S relative_residual() const {
    using std::abs;
    return residual() / (S(1) + abs(finite_difference));
  }
};

template <class S>
FirstVariation<S> first_variation(const DiscreteMap<S>& map, int k, const SectionField<S>& V,
                                  const S& dt) {
  if (!(dt > S(0))) throw InvalidArgument("first variation step must be positive");
  detail::require_field(V);
  if (V.map != &map && V.vectors.cols() != map.size())
    throw InvalidArgument("variation field does not match the map");
  SectionField<S> tau_k = k_tension_field(map, k);
  SectionField<S> Vm{&map, V.vectors};
  FirstVariation<S> out;
  out.predicted = -integrate_scalar(map.domain(), pointwise_inner(tau_k, Vm));
  S plus = energy_k(perturb(map, Vm, dt), k);
  S minus = energy_k(perturb(map, Vm, S(-dt)), k);
  out.finite_difference = (plus - minus) / (S(2) * dt);
  return out;
}

/// |finite-difference dE_k/dt + int <tau_k, V>|.
template <class S>
S first_variation_check(const DiscreteMap<S>& map, int k, const SectionField<S>& V, const S& dt) {
  return first_variation(map, k, V, dt).residual();
}

/// Delta-bar^{k-1} H with H = tau / m, the discrete side of the k-harmonic
/// submanifold condition. Meaningful for isometric immersions.
template <class S>
SectionField<S> mean_curvature_power_field(const DiscreteMap<S>& map, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  TensionTower<S> tower(map);
  SectionField<S> out = tower.lap(k - 1);
  out *= S(1) / S(map.domain().axes());
  return out;
}

}  // namespace kharm
