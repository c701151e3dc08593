#pragma once

// Canonical sample maps used by tests, experiments and the CLI.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "kharm/discrete_map.hpp"

namespace kharm {

/// Unit-speed circle of radius r in the (e1, e2) plane of E^n.
template <class S>
DiscreteMap<S> circle_map(int n, S radius, int samples) {
  using std::cos;
  using std::sin;
  if (n < 2) throw InvalidArgument("a circle needs n >= 2");
  if (!(radius > S(0))) throw InvalidArgument("circle radius must be positive");
  auto dom = Domain<S>::closed_curve(two_pi<S>() * radius, samples);
  Mat<S> pts = Mat<S>::Zero(n, samples);
  for (int i = 0; i < samples; ++i) {
    S theta = two_pi<S>() * S(i) / S(samples);
    pts(0, i) = radius * cos(theta);
    pts(1, i) = radius * sin(theta);
  }
  return DiscreteMap<S>(dom, ModelSpace<S>::euclidean(n), std::move(pts));
}

/// The closed straight line x(s) = a1 s + a0 on a domain of length L, lifted
/// through a seam shift of L a1.
template <class S>
DiscreteMap<S> line_map(const Vec<S>& a1, const Vec<S>& a0, S length, int samples) {
  auto dom = Domain<S>::closed_curve(length, samples);
  Mat<S> pts(a1.size(), samples);
  for (int i = 0; i < samples; ++i) pts.col(i) = a1 * dom.position(i, 0) + a0;
  return DiscreteMap<S>(dom, ModelSpace<S>::euclidean(static_cast<int>(a1.size())),
                        std::move(pts), {Vec<S>(a1 * length), Vec<S>()});
}

/// Constant map to p.
template <class S>
DiscreteMap<S> constant_map(const ModelSpace<S>& space, const Vec<S>& p, S length, int samples) {
  Mat<S> pts(space.ambient_dim(), samples);
  for (int i = 0; i < samples; ++i) pts.col(i) = p;
  return DiscreteMap<S>(Domain<S>::closed_curve(length, samples), space, std::move(pts));
}

/// Latitude circle {x_n = z0} on the sphere of curvature K in E^{n+1}, unit
/// speed, sampled uniformly. z0 = 0 is a great circle.
template <class S>
DiscreteMap<S> latitude_circle(const ModelSpace<S>& sphere, S z0, int samples) {
  using std::abs;
  using std::cos;
  using std::sin;
  using std::sqrt;
  if (sphere.kind() != SpaceKind::Sphere) throw InvalidArgument("latitude circles need a sphere");
  S R = sphere.radius();
  if (!(abs(z0) < R)) throw InvalidArgument("latitude must lie strictly inside (-R, R)");
  S rho = sqrt(R * R - z0 * z0);
  auto dom = Domain<S>::closed_curve(two_pi<S>() * rho, samples);
  const int dim = sphere.ambient_dim();
  Mat<S> pts = Mat<S>::Zero(dim, samples);
  for (int i = 0; i < samples; ++i) {
    S theta = two_pi<S>() * S(i) / S(samples);
    pts(0, i) = rho * cos(theta);
    pts(1, i) = rho * sin(theta);
    pts(dim - 1, i) = z0;
  }
  return DiscreteMap<S>(dom, sphere, std::move(pts));
}

template <class S>
DiscreteMap<S> great_circle(const ModelSpace<S>& sphere, int samples) {
  return latitude_circle(sphere, S(0), samples);
}

/// Unit-speed geodesic circle of radius rho about the vertex of the hyperboloid.
template <class S>
DiscreteMap<S> hyperbolic_circle(const ModelSpace<S>& hyp, S rho, int samples) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  if (hyp.kind() != SpaceKind::Hyperbolic) throw InvalidArgument("needs a hyperbolic space");
  S R = hyp.radius();
  S ring = R * sinh(rho / R);
  auto dom = Domain<S>::closed_curve(two_pi<S>() * ring, samples);
  Mat<S> pts = Mat<S>::Zero(hyp.ambient_dim(), samples);
  for (int i = 0; i < samples; ++i) {
    S theta = two_pi<S>() * S(i) / S(samples);
    pts(0, i) = R * cosh(rho / R);
    pts(1, i) = ring * cos(theta);
    pts(2, i) = ring * sin(theta);
  }
  return DiscreteMap<S>(dom, hyp, std::move(pts));
}

/// Ellipse (a cos t, b sin t) in E^2 sampled uniformly in t in [0, 2pi).
template <class S>
DiscreteMap<S> ellipse_map(S a, S b, int samples) {
  using std::cos;
  using std::sin;
  auto dom = Domain<S>::closed_curve(two_pi<S>(), samples);
  Mat<S> pts(2, samples);
  for (int i = 0; i < samples; ++i) {
    S t = dom.position(i, 0);
    pts(0, i) = a * cos(t);
    pts(1, i) = b * sin(t);
  }
  return DiscreteMap<S>(dom, ModelSpace<S>::euclidean(2), std::move(pts));
}

/// Closed curve phi(s) = center + r(cos th(s), sin th(s)) with the
/// non-uniform angle th(s) = s/r + warp sin(s/r): same image as the circle,
/// different parametrization.
template <class S>
DiscreteMap<S> warped_circle(S radius, S warp, int samples) {
  using std::cos;
  using std::sin;
  auto dom = Domain<S>::closed_curve(two_pi<S>() * radius, samples);
  Mat<S> pts(2, samples);
  for (int i = 0; i < samples; ++i) {
    S u = dom.position(i, 0) / radius;
    S th = u + warp * sin(u);
    pts(0, i) = radius * cos(th);
    pts(1, i) = radius * sin(th);
  }
  return DiscreteMap<S>(dom, ModelSpace<S>::euclidean(2), std::move(pts));
}

/// Flat torus map (x, y) -> (cos x, sin x, cos y, sin y) / sqrt(2) into the
/// unit 3-sphere (Clifford torus; a harmonic map).
template <class S>
DiscreteMap<S> clifford_torus(int samples) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  auto dom = Domain<S>::flat_torus(two_pi<S>(), two_pi<S>(), samples, samples);
  Mat<S> pts(4, dom.size());
  S c = S(1) / sqrt(S(2));
  for (int i = 0; i < dom.size(); ++i) {
    S x = dom.position(i, 0), y = dom.position(i, 1);
    pts(0, i) = c * cos(x);
    pts(1, i) = c * sin(x);
    pts(2, i) = c * cos(y);
    pts(3, i) = c * sin(y);
  }
  return DiscreteMap<S>(dom, ModelSpace<S>::sphere(3, S(1)), std::move(pts));
}

/// Settings for seeded random closed curves: a base loop plus a truncated
/// trigonometric perturbation.
struct RandomCurveSpec {
  enum class Base { Geodesic, Loop };
  Base base = Base::Geodesic;
  int samples = 64;
  double length = 6.283185307179586;
  int max_mode = 3;        // highest perturbation frequency
  double amplitude = 0.1;  // per-coefficient scale
  double loop_radius = 0.5;
  std::uint64_t seed = 1;
  int difference_order = 2;
};

namespace detail {

// sum_{m=1..M} (a_m cos(m u) + b_m sin(m u)) with normal random ambient a_m, b_m.
template <class S>
Mat<S> random_trig_field(int dim, int samples, int max_mode, double amplitude, std::mt19937_64& rng) {
  using std::cos;
  using std::sin;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat<S> out = Mat<S>::Zero(dim, samples);
  for (int m = 1; m <= max_mode; ++m) {
    Vec<S> a(dim), b(dim);
    for (int d = 0; d < dim; ++d) {
      a(d) = S(amplitude * gauss(rng) / m);
      b(d) = S(amplitude * gauss(rng) / m);
    }
    for (int i = 0; i < samples; ++i) {
      S u = two_pi<S>() * S(m) * S(i) / S(samples);
      out.col(i) += a * cos(u) + b * sin(u);
    }
  }
  return out;
}

template <class S>
Vec<S> base_point(const ModelSpace<S>& space) {
  Vec<S> p = Vec<S>::Zero(space.ambient_dim());
  if (space.kind() == SpaceKind::Sphere) p(space.ambient_dim() - 1) = space.radius();
  if (space.kind() == SpaceKind::Hyperbolic) p(0) = space.radius();
  return p;
}

}  // namespace detail

/// Seeded random closed curve. With Base::Geodesic the unperturbed curve is
/// harmonic: a constant map for E^n and H^n (no closed geodesics there) and
/// a great circle for the sphere. With Base::Loop it is a circle of radius
/// `loop_radius` through the base point's tangent plane.
template <class S>
DiscreteMap<S> random_closed_curve(const ModelSpace<S>& space, const RandomCurveSpec& spec) {
  using std::cos;
  using std::sin;
  std::mt19937_64 rng(spec.seed);
  const int dim = space.ambient_dim();
  const int n = spec.samples;
  auto dom = Domain<S>::closed_curve(S(spec.length), n, spec.difference_order);
  Vec<S> p0 = detail::base_point(space);

  // Tangent-plane offsets at p0, then pushed to the manifold with exp.
  Mat<S> offsets = detail::random_trig_field<S>(dim, n, spec.max_mode, spec.amplitude, rng);
  bool loop = spec.base == RandomCurveSpec::Base::Loop ||
              (space.kind() == SpaceKind::Sphere && spec.base == RandomCurveSpec::Base::Geodesic);
  S loop_r = space.kind() == SpaceKind::Sphere && spec.base == RandomCurveSpec::Base::Geodesic
                 ? space.radius() * pi<S>() / S(2)
                 : S(spec.loop_radius);
  // Plane spanned by the first two tangent directions at p0.
  int ax = space.kind() == SpaceKind::Hyperbolic ? 1 : 0;
  Mat<S> pts(dim, n);
  for (int i = 0; i < n; ++i) {
    Vec<S> v = space.project(p0, Vec<S>(offsets.col(i)));
    if (loop) {
      S u = two_pi<S>() * S(i) / S(n);
      v(ax) += loop_r * cos(u);
      v(ax + 1) += loop_r * sin(u);
    }
    pts.col(i) = space.exp(p0, space.project(p0, v));
  }
  return DiscreteMap<S>(dom, space, std::move(pts));
}

/// Smooth random tangent field along a map (periodic, modes <= max_mode).
template <class S>
SectionField<S> random_section(const DiscreteMap<S>& map, int max_mode, double amplitude,
                               std::uint64_t seed) {
  if (map.domain().kind() != DomainKind::ClosedCurve)
    throw InvalidArgument("random sections are generated along closed curves only");
  std::mt19937_64 rng(seed);
  Mat<S> raw = detail::random_trig_field<S>(map.space().ambient_dim(), map.size(), max_mode,
                                            amplitude, rng);
  return make_field(map, std::move(raw));
}

}  // namespace kharm
