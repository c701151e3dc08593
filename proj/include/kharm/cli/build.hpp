#pragma once

// Turns the [geometry] / [domain] / [map] blocks into a model space and a
// sampled map.

#include <cmath>
#include <string>

#include "kharm/cli/config.hpp"
#include "kharm/curves.hpp"
#include "kharm/flow.hpp"
#include "kharm/map_io.hpp"

namespace kharm::cli {

template <class S>
ModelSpace<S> build_space(const RunConfig& c) {
  try {
    return ModelSpace<S>::make(c.geometry.kind, c.geometry.n, S(c.curvature()));
  } catch (const InvalidArgument& e) {
    config_error(c, "geometry.kind", e.what());
  }
}

namespace detail {

inline void require_kind(const RunConfig& c, SpaceKind kind) {
  if (c.geometry.kind != kind)
    config_error(c, "map.shape",
                 "shape '" + c.map.shape + "' needs geometry.kind = " + std::string(to_string(kind)));
}

inline void require_dim(const RunConfig& c, int n) {
  if (c.geometry.n != n)
    config_error(c, "map.shape", "shape '" + c.map.shape + "' needs geometry.n = " + std::to_string(n));
}

inline bool has_natural_length(const std::string& shape) {
  return shape != "line" && shape != "perturbed_geodesic" && shape != "random_loop";
}

}  // namespace detail

/// The configured map. `seed` drives random shapes.
template <class S>
DiscreteMap<S> build_map(const RunConfig& c, std::uint64_t seed) {
  const auto& m = c.map;
  const int N = c.domain.N;
  if (c.domain.L && detail::has_natural_length(m.shape))
    config_error(c, "domain.L", "shape '" + m.shape + "' fixes its own domain length");
  const S L = c.domain.L ? S(*c.domain.L) : two_pi<S>();

  auto finish = [&](DiscreteMap<S> map) {
    if (map.domain().difference_order() != c.domain.order &&
        (m.shape != "file" || c.has("domain.order")))
      map = map.with_difference_order(c.domain.order);
    return map;
  };

  if (m.shape == "file") return finish(load_map<S>(c.resolve(m.path)));

  const auto space = build_space<S>(c);
  const int n = c.geometry.n;
  if (m.shape == "circle") {
    detail::require_kind(c, SpaceKind::Euclidean);
    return finish(circle_map<S>(n, S(m.radius), N));
  }
  if (m.shape == "line") {
    detail::require_kind(c, SpaceKind::Euclidean);
    Vec<S> a1 = Vec<S>::Zero(n), a0 = Vec<S>::Zero(n);
    if (m.direction.empty()) {
      a1(0) = S(1);
    } else if (static_cast<int>(m.direction.size()) != n) {
      config_error(c, "map.direction", "needs " + std::to_string(n) + " components");
    } else {
      for (int d = 0; d < n; ++d) a1(d) = S(m.direction[d]);
    }
    if (!m.offset.empty()) {
      if (static_cast<int>(m.offset.size()) != n)
        config_error(c, "map.offset", "needs " + std::to_string(n) + " components");
      for (int d = 0; d < n; ++d) a0(d) = S(m.offset[d]);
    }
    return finish(line_map<S>(a1, a0, L, N));
  }
  if (m.shape == "latitude" || m.shape == "great_circle" || m.shape == "biharmonic_circle") {
    detail::require_kind(c, SpaceKind::Sphere);
    S z(0);
    if (m.shape == "latitude") {
      if (!m.z0) config_error(c, "map.z0", "shape = latitude needs z0");
      z = S(*m.z0);
    } else if (m.shape == "biharmonic_circle") {
      detail::require_dim(c, 2);
      z = biharmonic_circle_search(space, N);
    }
    return finish(latitude_circle(space, z, N));
  }
  if (m.shape == "hyperbolic_circle") {
    detail::require_kind(c, SpaceKind::Hyperbolic);
    return finish(hyperbolic_circle(space, S(m.rho), N));
  }
  if (m.shape == "ellipse") {
    detail::require_kind(c, SpaceKind::Euclidean);
    detail::require_dim(c, 2);
    return finish(ellipse_map<S>(S(m.a), S(m.b), N));
  }
  if (m.shape == "warped_circle") {
    detail::require_kind(c, SpaceKind::Euclidean);
    detail::require_dim(c, 2);
    return finish(warped_circle<S>(S(m.radius), S(m.warp), N));
  }
  if (m.shape == "clifford_torus") {
    detail::require_kind(c, SpaceKind::Sphere);
    detail::require_dim(c, 3);
    if (c.curvature() != 1.0) config_error(c, "geometry.K", "the Clifford torus is built in S^3(1)");
    return finish(clifford_torus<S>(N));
  }
  // perturbed_geodesic, random_loop
  RandomCurveSpec spec;
  spec.base = m.shape == "random_loop" ? RandomCurveSpec::Base::Loop : RandomCurveSpec::Base::Geodesic;
  spec.samples = N;
  spec.length = to_double(L);
  spec.amplitude = m.amplitude;
  spec.max_mode = m.modes > 0 ? m.modes : (m.shape == "random_loop" ? 3 : std::max(1, N / 8));
  spec.loop_radius = m.radius;
  spec.seed = seed;
  spec.difference_order = c.domain.order;
  return random_closed_curve(space, spec);
}

}  // namespace kharm::cli
