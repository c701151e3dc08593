#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "kharm/errors.hpp"
#include "kharm/model_space.hpp"
#include "kharm/scalar.hpp"

namespace kharm {

enum class DomainKind { ClosedCurve, FlatTorus };

/// Flat boundaryless domain: a closed curve R/LZ or a flat torus
/// (R/L1 Z) x (R/L2 Z), sampled uniformly. The coordinate frame {e_i} is
/// parallel, so every nabla_{e_i} e_i term vanishes.
template <class S>
class Domain {
 public:
  static constexpr int kMinSamples = 8;

  static Domain closed_curve(S length, int samples, int order = 2) {
    return Domain(DomainKind::ClosedCurve, {length, S(0)}, {samples, 1}, order);
  }
  static Domain flat_torus(S length1, S length2, int samples1, int samples2, int order = 2) {
    return Domain(DomainKind::FlatTorus, {length1, length2}, {samples1, samples2}, order);
  }

  DomainKind kind() const { return kind_; }
  int axes() const { return kind_ == DomainKind::ClosedCurve ? 1 : 2; }
  int samples(int axis) const { return counts_[axis]; }
  int size() const { return counts_[0] * counts_[1]; }
  // Accuracy order of the central first-derivative stencil (2 or 4).
  int difference_order() const { return order_; }
  Domain with_difference_order(int order) const {
    return Domain(kind_, lengths_, counts_, order);
  }
  const S& length(int axis) const { return lengths_[axis]; }
  S spacing(int axis) const { return lengths_[axis] / S(counts_[axis]); }
  S cell_volume() const {
    S v = spacing(0);
    if (axes() == 2) v *= spacing(1);
    return v;
  }
  S volume() const { return axes() == 2 ? lengths_[0] * lengths_[1] : lengths_[0]; }

  // Grid coordinate of sample `index` along `axis`.
  int coord(int index, int axis) const {
    return axis == 0 ? index % counts_[0] : index / counts_[0];
  }
  S position(int index, int axis) const { return S(coord(index, axis)) * spacing(axis); }

  /// Periodic neighbour `step` cells away along `axis`; `wraps` receives the
  /// number of times the seam was crossed (signed).
  int neighbor(int index, int axis, int step, int* wraps = nullptr) const {
    int c = coord(index, axis);
    int n = counts_[axis];
    int t = c + step;
    int w = 0;
    while (t < 0) {
      t += n;
      --w;
    }
    while (t >= n) {
      t -= n;
      ++w;
    }
    if (wraps) *wraps = w;
    return axis == 0 ? index - c + t : index + (t - c) * counts_[0];
  }

  bool operator==(const Domain& o) const {
    return kind_ == o.kind_ && lengths_ == o.lengths_ && counts_ == o.counts_ &&
           order_ == o.order_;
  }

 private:
  Domain(DomainKind kind, std::array<S, 2> lengths, std::array<int, 2> counts, int order)
      : kind_(kind), lengths_(lengths), counts_(counts), order_(order) {
    if (order != 2 && order != 4) throw InvalidArgument("difference order must be 2 or 4");
    for (int a = 0; a < axes(); ++a) {
      if (counts_[a] < kMinSamples)
        throw InvalidArgument("domain needs at least " + std::to_string(kMinSamples) +
                              " samples per axis");
      if (!(lengths_[a] > S(0))) throw InvalidArgument("domain lengths must be positive");
    }
  }

  DomainKind kind_;
  std::array<S, 2> lengths_;
  std::array<int, 2> counts_;
  int order_;
};

/// A sampled map from a flat domain into a model space. Points are stored
/// as ambient columns, one per sample.
///
/// For Euclidean targets an optional seam shift w_a lets the lift of the map
/// satisfy phi(x + L_a e_a) = phi(x) + w_a, i.e. the map is into the flat
/// quotient E^n / (w_a Z). This is what makes closed straight lines
/// (geodesics) available on periodic domains.
template <class S>
class DiscreteMap {
 public:
  DiscreteMap(Domain<S> domain, ModelSpace<S> space, Mat<S> points,
              std::array<Vec<S>, 2> seam_shift = {})
      : domain_(std::move(domain)), space_(std::move(space)), points_(std::move(points)) {
    if (points_.rows() != space_.ambient_dim() || points_.cols() != domain_.size())
      throw InvalidArgument("point matrix must be ambient_dim x samples");
    for (Eigen::Index i = 0; i < points_.cols(); ++i)
      points_.col(i) = space_.admit_point(points_.col(i));
    for (int a = 0; a < 2; ++a) {
      if (seam_shift[a].size() == 0) {
        shift_[a] = Vec<S>::Zero(space_.ambient_dim());
      } else {
        if (seam_shift[a].size() != space_.ambient_dim())
          throw InvalidArgument("seam shift has wrong dimension");
        if (space_.kind() != SpaceKind::Euclidean && !seam_shift[a].isZero())
          throw InvalidArgument("seam shifts are only meaningful for Euclidean targets");
        shift_[a] = seam_shift[a];
      }
    }
  }

  const Domain<S>& domain() const { return domain_; }
  const ModelSpace<S>& space() const { return space_; }
  const Mat<S>& points() const { return points_; }
  auto point(int i) const { return points_.col(i); }
  int size() const { return domain_.size(); }
  const Vec<S>& seam_shift(int axis) const { return shift_[axis]; }
  bool has_seam_shift() const { return !shift_[0].isZero() || !shift_[1].isZero(); }

  /// Lifted ambient position of the neighbour `step` cells away.
  Vec<S> neighbor_point(int i, int axis, int step) const {
    int wraps = 0;
    int j = domain_.neighbor(i, axis, step, &wraps);
    if (wraps == 0) return points_.col(j);
    return points_.col(j) + S(wraps) * shift_[axis];
  }

  /// Same domain/space/shift, new points.
  DiscreteMap with_points(Mat<S> points) const {
    return DiscreteMap(domain_, space_, std::move(points), shift_);
  }

  /// Same samples on a domain using a different difference stencil.
  DiscreteMap with_difference_order(int order) const {
    return DiscreteMap(domain_.with_difference_order(order), space_, points_, shift_);
  }

 private:
  Domain<S> domain_;
  ModelSpace<S> space_;
  Mat<S> points_;
  std::array<Vec<S>, 2> shift_;
};

/// Section of the pullback bundle: one ambient tangent vector per sample.
/// Holds a non-owning pointer; the map must outlive the field.
template <class S>
struct SectionField {
  const DiscreteMap<S>* map = nullptr;
  Mat<S> vectors;

  int size() const { return static_cast<int>(vectors.cols()); }
  auto at(int i) const { return vectors.col(i); }

  /// max over samples of |V|.
  S sup_norm() const {
    S best(0);
    for (int i = 0; i < size(); ++i) {
      S n = map->space().norm(vectors.col(i));
      if (n > best) best = n;
    }
    return best;
  }

  /// (integral |V|^2)^(1/2).
  S l2_norm() const {
    using std::sqrt;
    S acc(0);
    for (int i = 0; i < size(); ++i) acc += map->space().inner(vectors.col(i), vectors.col(i));
    return sqrt(acc * map->domain().cell_volume());
  }

  SectionField& operator+=(const SectionField& o) {
    vectors += o.vectors;
    return *this;
  }
  SectionField& operator-=(const SectionField& o) {
    vectors -= o.vectors;
    return *this;
  }
  SectionField& operator*=(const S& c) {
    vectors *= c;
    return *this;
  }
  friend SectionField operator+(SectionField a, const SectionField& b) { return a += b; }
  friend SectionField operator-(SectionField a, const SectionField& b) { return a -= b; }
  friend SectionField operator*(const S& c, SectionField a) { return a *= c; }
};

template <class S>
SectionField<S> zero_field(const DiscreteMap<S>& map) {
  return {&map, Mat<S>::Zero(map.space().ambient_dim(), map.size())};
}

/// Projects arbitrary ambient vectors to the tangent spaces along the map.
template <class S>
SectionField<S> make_field(const DiscreteMap<S>& map, Mat<S> vectors) {
  if (vectors.rows() != map.space().ambient_dim() || vectors.cols() != map.size())
    throw InvalidArgument("field matrix must be ambient_dim x samples");
  for (int i = 0; i < map.size(); ++i)
    vectors.col(i) = map.space().project(map.point(i), vectors.col(i));
  return {&map, std::move(vectors)};
}

namespace detail {

template <class S>
void require_axis(const Domain<S>& d, int axis) {
  if (axis < 0 || axis >= d.axes())
    throw InvalidArgument("axis " + std::to_string(axis) + " out of range");
}

template <class S>
void require_field(const SectionField<S>& f) {
  if (!f.map) throw InvalidArgument("section field is not attached to a map");
  if (f.vectors.cols() != f.map->size() || f.vectors.rows() != f.map->space().ambient_dim())
    throw InvalidArgument("section field shape does not match its map");
}

// Antisymmetric central stencil: f'(x) ~ sum_j w_j (f(x + j h) - f(x - j h)) / h.
template <class S>
std::vector<std::pair<int, S>> central_weights(int order) {
  if (order == 4) return {{1, S(2) / S(3)}, {2, S(-1) / S(12)}};
  return {{1, S(1) / S(2)}};
}

// Projected central difference of ambient columns along one axis.
template <class S>
Mat<S> central_difference(const DiscreteMap<S>& map, const Mat<S>& V, int axis) {
  const auto& dom = map.domain();
  const auto weights = central_weights<S>(dom.difference_order());
  const S inv = S(1) / dom.spacing(axis);
  Mat<S> out(V.rows(), V.cols());
  Vec<S> d(V.rows());
  for (int i = 0; i < map.size(); ++i) {
    d.setZero();
    for (const auto& [j, w] : weights)
      d += w * (V.col(dom.neighbor(i, axis, j)) - V.col(dom.neighbor(i, axis, -j)));
    out.col(i) = map.space().project(map.point(i), d * inv);
  }
  return out;
}

}  // namespace detail

/// dphi(e_axis): projected central difference of the (lifted) points.
template <class S>
SectionField<S> dphi(const DiscreteMap<S>& map, int axis) {
  detail::require_axis(map.domain(), axis);
  const auto weights = detail::central_weights<S>(map.domain().difference_order());
  const S inv = S(1) / map.domain().spacing(axis);
  Mat<S> out(map.space().ambient_dim(), map.size());
  Vec<S> d(map.space().ambient_dim());
  for (int i = 0; i < map.size(); ++i) {
    d.setZero();
    for (const auto& [j, w] : weights)
      d += w * (map.neighbor_point(i, axis, j) - map.neighbor_point(i, axis, -j));
    out.col(i) = map.space().project(map.point(i), Vec<S>(d * inv));
  }
  return {&map, std::move(out)};
}

/// Pullback connection nabla-bar_{e_axis} V.
template <class S>
SectionField<S> covariant_derivative(const SectionField<S>& field, int axis) {
  detail::require_field(field);
  detail::require_axis(field.map->domain(), axis);
  return {field.map, detail::central_difference(*field.map, field.vectors, axis)};
}

/// Rough Laplacian applied `exponent` times, positive sign convention:
/// Delta-bar V = -sum_k (nabla_k nabla_k V - nabla_{nabla_{e_k} e_k} V).
/// exponent = -1 yields the zero field.
template <class S>
SectionField<S> rough_laplacian(const SectionField<S>& field, int exponent = 1) {
  detail::require_field(field);
  if (exponent < -1) throw InvalidArgument("rough Laplacian exponent must be >= -1");
  if (exponent == -1) return zero_field(*field.map);
  const auto& map = *field.map;
  Mat<S> V = field.vectors;
  for (int rep = 0; rep < exponent; ++rep) {
    Mat<S> acc = Mat<S>::Zero(V.rows(), V.cols());
    for (int a = 0; a < map.domain().axes(); ++a) {
      Mat<S> first = detail::central_difference(map, V, a);
      acc -= detail::central_difference(map, first, a);
      // nabla_{e_a} e_a = 0 on a flat domain with a parallel frame; the
      // corresponding -nabla-bar_{nabla_{e_a} e_a} V term contributes nothing.
    }
    V = std::move(acc);
  }
  return {&map, std::move(V)};
}

/// Periodic trapezoid rule: cell volume times the sum of the samples.
template <class S, class Range>
S integrate_scalar(const Domain<S>& domain, const Range& samples) {
  if (static_cast<int>(samples.size()) != domain.size())
    throw InvalidArgument("sample array length " + std::to_string(samples.size()) +
                          " does not match domain size " + std::to_string(domain.size()));
  S acc(0);
  for (const auto& v : samples) acc += S(v);
  return acc * domain.cell_volume();
}

/// Pointwise <V, W>.
template <class S>
Vec<S> pointwise_inner(const SectionField<S>& a, const SectionField<S>& b) {
  Vec<S> out(a.size());
  for (int i = 0; i < a.size(); ++i) out(i) = a.map->space().inner(a.at(i), b.at(i));
  return out;
}

/// Pointwise sum over axes of <V_a, W_a>.
template <class S>
Vec<S> pointwise_inner(const std::vector<SectionField<S>>& a,
                       const std::vector<SectionField<S>>& b) {
  Vec<S> out = Vec<S>::Zero(a.front().size());
  for (std::size_t k = 0; k < a.size(); ++k) out += pointwise_inner(a[k], b[k]);
  return out;
}

/// Speed |dphi(e_a)| measured with a fourth-order stencil, worst deviation
/// from 1 over samples and axes (plus |<dphi_1, dphi_2>| on a torus). Used to
/// decide whether a map counts as an isometric immersion.
template <class S>
S isometry_defect(const DiscreteMap<S>& map) {
  using std::abs;
  const auto& dom = map.domain();
  std::vector<Mat<S>> d(dom.axes());
  for (int a = 0; a < dom.axes(); ++a) {
    S inv = S(1) / (S(12) * dom.spacing(a));
    d[a].resize(map.space().ambient_dim(), map.size());
    for (int i = 0; i < map.size(); ++i) {
      Vec<S> v = (S(8) * (map.neighbor_point(i, a, 1) - map.neighbor_point(i, a, -1)) -
                  (map.neighbor_point(i, a, 2) - map.neighbor_point(i, a, -2))) *
                 inv;
      d[a].col(i) = map.space().project(map.point(i), v);
    }
  }
  S worst(0);
  for (int i = 0; i < map.size(); ++i) {
    for (int a = 0; a < dom.axes(); ++a) {
      S dev = abs(map.space().norm(d[a].col(i)) - S(1));
      if (dev > worst) worst = dev;
    }
    if (dom.axes() == 2) {
      S cross = abs(map.space().inner(d[0].col(i), d[1].col(i)));
      if (cross > worst) worst = cross;
    }
  }
  return worst;
}

inline constexpr double kIsometryTol = 1e-6;

template <class S>
bool is_isometric_immersion(const DiscreteMap<S>& map, double tol = kIsometryTol) {
  return isometry_defect(map) <= S(tol);
}

namespace detail {

// Real trigonometric interpolant of periodic columns on [0, 2pi).
template <class S>
struct TrigInterpolant {
  Mat<S> cos_coef;  // column m: a_m
  Mat<S> sin_coef;  // column m: b_m
  Vec<S> mean;
  int modes = 0;

  explicit TrigInterpolant(const Mat<S>& samples) {
    using std::cos;
    using std::sin;
    const int n = static_cast<int>(samples.cols());
    modes = n / 2;
    mean = samples.rowwise().sum() / S(n);
    cos_coef = Mat<S>::Zero(samples.rows(), modes + 1);
    sin_coef = Mat<S>::Zero(samples.rows(), modes + 1);
    for (int m = 1; m <= modes; ++m) {
      for (int j = 0; j < n; ++j) {
        S t = two_pi<S>() * S(m) * S(j) / S(n);
        cos_coef.col(m) += samples.col(j) * cos(t);
        sin_coef.col(m) += samples.col(j) * sin(t);
      }
      S w = (2 * m == n) ? S(1) / S(n) : S(2) / S(n);
      cos_coef.col(m) *= w;
      sin_coef.col(m) *= w;
    }
  }

  Vec<S> value(const S& t) const {
    using std::cos;
    using std::sin;
    Vec<S> out = mean;
    for (int m = 1; m <= modes; ++m)
      out += cos_coef.col(m) * cos(S(m) * t) + sin_coef.col(m) * sin(S(m) * t);
    return out;
  }

  Vec<S> derivative(const S& t) const {
    using std::cos;
    using std::sin;
    Vec<S> out = Vec<S>::Zero(mean.size());
    for (int m = 1; m <= modes; ++m)
      out += S(m) * (sin_coef.col(m) * cos(S(m) * t) - cos_coef.col(m) * sin(S(m) * t));
    return out;
  }
};

}  // namespace detail

/// Resamples a closed curve at uniform arc length. The curve is interpolated
/// trigonometrically in its current parameter, its speed is expanded in a
/// Fourier series so cumulative arc length is available in closed form, and
/// the new samples are found by Newton iteration on the arc length. The
/// returned map lives on a domain whose length is the total arc length.
template <class S>
DiscreteMap<S> reparametrize_arclength(const DiscreteMap<S>& map) {
  using std::abs;
  using std::cos;
  using std::sin;
  const auto& dom = map.domain();
  if (dom.kind() != DomainKind::ClosedCurve)
    throw InvalidArgument("arc-length reparametrization needs a closed-curve domain");
  const auto& space = map.space();
  const int n = dom.samples(0);
  const int dim = space.ambient_dim();

  // Remove the seam translation so the remainder is periodic.
  const Vec<S>& shift = map.seam_shift(0);
  Mat<S> periodic(dim, n);
  for (int j = 0; j < n; ++j) periodic.col(j) = map.point(j) - shift * (S(j) / S(n));
  detail::TrigInterpolant<S> curve(periodic);
  const Vec<S> drift = shift / two_pi<S>();

  auto velocity = [&](const S& t) -> Vec<S> { return curve.derivative(t) + drift; };

  // Speed samples and their Fourier series.
  const int m = 4 * n;
  Mat<S> speed(1, m);
  for (int i = 0; i < m; ++i) speed(0, i) = space.norm(velocity(two_pi<S>() * S(i) / S(m)));
  detail::TrigInterpolant<S> speed_series(speed);
  const S mean_speed = speed_series.mean(0);
  const S total = two_pi<S>() * mean_speed;

  if (!(total > S(10) * dom.spacing(0) * S(ModelSpace<S>::kTol)))
    throw DegenerateInput("curve is degenerate (total length " +
                          std::to_string(static_cast<double>(total)) + ")");

  auto arc = [&](const S& t) {
    S s = mean_speed * t;
    for (int k = 1; k <= speed_series.modes; ++k) {
      S a = speed_series.cos_coef(0, k), b = speed_series.sin_coef(0, k);
      s += (a * sin(S(k) * t) + b * (S(1) - cos(S(k) * t))) / S(k);
    }
    return s;
  };
  auto rate = [&](const S& t) {
    S v = mean_speed;
    for (int k = 1; k <= speed_series.modes; ++k)
      v += speed_series.cos_coef(0, k) * cos(S(k) * t) + speed_series.sin_coef(0, k) * sin(S(k) * t);
    return v;
  };

  const S step = total / S(n);
  Mat<S> out(dim, n);
  S t = S(0);
  for (int j = 0; j < n; ++j) {
    const S target = step * S(j);
    if (j > 0) t += step / rate(t);
    for (int it = 0; it < 50; ++it) {
      S f = arc(t) - target;
      S r = rate(t);
      if (!(r > S(0))) throw DegenerateInput("curve speed vanishes during reparametrization");
      S dt = f / r;
      t -= dt;
      if (abs(dt) < S(64) * std::numeric_limits<S>::epsilon() * (S(1) + abs(t))) break;
    }
    Vec<S> p = curve.value(t) + drift * t;
    out.col(j) = space.kind() == SpaceKind::Euclidean ? p : space.normalize(p);
  }
  return DiscreteMap<S>(Domain<S>::closed_curve(total, n, dom.difference_order()), space,
                        std::move(out),
                        {shift, Vec<S>()});
}

}  // namespace kharm
