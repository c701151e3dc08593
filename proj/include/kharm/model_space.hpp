#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "kharm/errors.hpp"
#include "kharm/scalar.hpp"

namespace kharm {

enum class SpaceKind { Euclidean, Sphere, Hyperbolic };

inline std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::Hyperbolic: return "hyperbolic";
  }
  return "?";
}

inline SpaceKind parse_space_kind(std::string_view s) {
  if (s == "euclidean") return SpaceKind::Euclidean;
  if (s == "sphere") return SpaceKind::Sphere;
  if (s == "hyperbolic") return SpaceKind::Hyperbolic;
  throw InvalidArgument("unknown space kind '" + std::string(s) + "'");
}

/// Simply connected space of constant sectional curvature K, embedded
/// extrinsically: E^n as itself, the sphere as the round sphere of radius
/// 1/sqrt(K) in E^{n+1}, hyperbolic space as the upper sheet of
/// <x, x>_L = 1/K in Minkowski space R^{1,n} with signature (-, +, ..., +).
///
/// The Levi-Civita connection of the target is ambient differentiation
/// followed by `project`, so no charts or Christoffel symbols are needed.
template <class S>
class ModelSpace {
 public:
  // Points within this residual count as on the manifold.
  static constexpr double kTol = 1e-9;
  // Constructors renormalize points up to this residual, reject beyond it.
  static constexpr double kRenormalizeTol = 1e-6;

  static ModelSpace euclidean(int n) { return ModelSpace(SpaceKind::Euclidean, S(0), n); }
  static ModelSpace sphere(int n, S K = S(1)) { return ModelSpace(SpaceKind::Sphere, K, n); }
  static ModelSpace hyperbolic(int n, S K = S(-1)) {
    return ModelSpace(SpaceKind::Hyperbolic, K, n);
  }
  static ModelSpace make(SpaceKind kind, int n, S K) { return ModelSpace(kind, K, n); }

  SpaceKind kind() const { return kind_; }
  const S& curvature() const { return K_; }
  int dim() const { return n_; }
  int ambient_dim() const { return kind_ == SpaceKind::Euclidean ? n_ : n_ + 1; }

  // Radius 1/sqrt|K| of the curved model; undefined for Euclidean.
  S radius() const {
    using std::abs;
    using std::sqrt;
    return S(1) / sqrt(abs(K_));
  }

  /// Ambient bilinear form: Euclidean for E^n and the sphere, Lorentzian for
  /// the hyperboloid. Restricted to tangent spaces it is the metric h.
  template <class A, class B>
  S inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    if (kind_ != SpaceKind::Hyperbolic) return a.dot(b);
    return a.tail(n_).dot(b.tail(n_)) - a(0) * b(0);
  }

  template <class A>
  S norm(const Eigen::MatrixBase<A>& v) const {
    using std::sqrt;
    S q = inner(v, v);
    return q > S(0) ? S(sqrt(q)) : S(0);
  }

  /// |<p, p> - 1/K| (zero for Euclidean), plus a sheet check for H^n.
  template <class A>
  S constraint_residual(const Eigen::MatrixBase<A>& p) const {
    using std::abs;
    if (kind_ == SpaceKind::Euclidean) return S(0);
    S r = abs(inner(p, p) - S(1) / K_);
    if (kind_ == SpaceKind::Hyperbolic && !(p(0) > S(0))) return S(1) / abs(K_) + r;
    return r;
  }

  /// Rescales p back onto the model (no-op for Euclidean).
  template <class A>
  Vec<S> normalize(const Eigen::MatrixBase<A>& p) const {
    using std::sqrt;
    Vec<S> q = p;
    if (kind_ == SpaceKind::Euclidean) return q;
    S ip = inner(q, q);
    S target = S(1) / K_;
    if (!(ip / target > S(0))) throw InvalidArgument("point cannot be normalized onto the model");
    q *= S(sqrt(target / ip));
    return q;
  }

  /// Validates a point; renormalizes when the residual is small, throws otherwise.
  template <class A>
  Vec<S> admit_point(const Eigen::MatrixBase<A>& p) const {
    if (p.size() != ambient_dim())
      throw InvalidArgument("point has ambient dimension " + std::to_string(p.size()) +
                            ", expected " + std::to_string(ambient_dim()));
    S res = constraint_residual(p);
    if (res <= S(kTol)) return p;
    if (res > S(kRenormalizeTol) * (S(1) + S(1) / scale_sq()))
      throw InvalidArgument("point is off the model space (residual " +
                            std::to_string(static_cast<double>(res)) + ")");
    return normalize(p);
  }

  /// Orthogonal projection onto T_p: w - K<w, p> p.
  template <class A, class B>
  Vec<S> project(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& w) const {
    if (kind_ == SpaceKind::Euclidean) return w;
    return w - (K_ * inner(w, p)) * p;
  }

  /// R(X, Y)Z = K(<Y, Z> X - <X, Z> Y).
  template <class A, class B, class C>
  Vec<S> curvature_apply(const Eigen::MatrixBase<A>& X, const Eigen::MatrixBase<B>& Y,
                         const Eigen::MatrixBase<C>& Z) const {
    return curvature_apply(X, Y, Z, K_);
  }

  // Same with an explicit curvature constant; used to isolate curvature terms.
  template <class A, class B, class C>
  Vec<S> curvature_apply(const Eigen::MatrixBase<A>& X, const Eigen::MatrixBase<B>& Y,
                         const Eigen::MatrixBase<C>& Z, const S& K) const {
    if (K == S(0)) return Vec<S>::Zero(X.size());
    return K * (inner(Y, Z) * X - inner(X, Z) * Y);
  }

  /// Exponential map at p, renormalized onto the model.
  template <class A, class B>
  Vec<S> exp(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& v) const {
    using std::abs;
    using std::cos;
    using std::cosh;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    if (kind_ == SpaceKind::Euclidean) return p + v;
    S len = norm(v);
    if (len == S(0)) return p;
    S rate = sqrt(abs(K_));
    S t = rate * len;
    Vec<S> q;
    if (kind_ == SpaceKind::Sphere)
      q = cos(t) * p + (sin(t) / t) * v;
    else
      q = cosh(t) * p + (sinh(t) / t) * v;
    return normalize(q);
  }

 private:
  ModelSpace(SpaceKind kind, S K, int n) : kind_(kind), K_(K), n_(n) {
    if (n < 1) throw InvalidArgument("model space dimension must be positive");
    switch (kind) {
      case SpaceKind::Euclidean:
        if (K != S(0)) throw InvalidArgument("Euclidean space requires K = 0");
        break;
      case SpaceKind::Sphere:
        if (!(K > S(0))) throw InvalidArgument("sphere requires K > 0");
        break;
      case SpaceKind::Hyperbolic:
        if (!(K < S(0))) throw InvalidArgument("hyperbolic space requires K < 0");
        break;
    }
  }

  S scale_sq() const {
    using std::abs;
    return kind_ == SpaceKind::Euclidean ? S(1) : S(1) / abs(K_);
  }

  SpaceKind kind_;
  S K_;
  int n_;
};

// Typed point/tangent API. Field-level code works on raw ambient columns.

template <class S>
struct ManifoldPoint {
  Vec<S> coords;
};

template <class S>
struct TangentVector {
  ManifoldPoint<S> base;
  Vec<S> vec;
};

template <class S>
ManifoldPoint<S> make_point(const ModelSpace<S>& space, const Vec<S>& coords) {
  return {space.admit_point(coords)};
}

/// Wraps w as a tangent vector at p after checking tangency.
template <class S>
TangentVector<S> make_tangent(const ModelSpace<S>& space, const ManifoldPoint<S>& p,
                              const Vec<S>& w) {
  using std::abs;
  if (w.size() != space.ambient_dim()) throw InvalidArgument("tangent vector has wrong size");
  if (space.kind() != SpaceKind::Euclidean &&
      abs(space.inner(p.coords, w)) > S(ModelSpace<S>::kTol) * (S(1) + space.norm(w)))
    throw InvalidArgument("vector is not tangent at the base point");
  return {p, w};
}

namespace detail {
template <class S>
void require_same_base(const TangentVector<S>& u, const TangentVector<S>& v) {
  if (u.base.coords.size() != v.base.coords.size() ||
      (u.base.coords - v.base.coords).template lpNorm<Eigen::Infinity>() > S(ModelSpace<S>::kTol))
    throw InvalidArgument("tangent vectors have different base points");
}
}  // namespace detail

template <class S>
S metric(const ModelSpace<S>& space, const TangentVector<S>& u, const TangentVector<S>& v) {
  detail::require_same_base(u, v);
  return space.inner(u.vec, v.vec);
}

template <class S>
TangentVector<S> project_tangent(const ModelSpace<S>& space, const ManifoldPoint<S>& p,
                                 const Vec<S>& w) {
  return {p, space.project(p.coords, w)};
}

template <class S>
TangentVector<S> curvature_op(const ModelSpace<S>& space, const TangentVector<S>& X,
                              const TangentVector<S>& Y, const TangentVector<S>& Z) {
  detail::require_same_base(X, Y);
  detail::require_same_base(X, Z);
  return {X.base, space.curvature_apply(X.vec, Y.vec, Z.vec)};
}

template <class S>
ManifoldPoint<S> retract(const ModelSpace<S>& space, const ManifoldPoint<S>& p,
                         const TangentVector<S>& v) {
  return {space.exp(p.coords, v.vec)};
}

}  // namespace kharm
