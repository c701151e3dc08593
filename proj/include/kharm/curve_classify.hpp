#pragma once

// Exact rational treatment of polynomial curves x(s) = sum_i c_i s^i in E^n:
// the k-harmonic submanifold condition Delta^{k-1} H = 0, the unit-speed
// constraint system, and the descending elimination that forces a curve of
// degree <= 2k-1 with unit speed to be a straight line.

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kharm/errors.hpp"

namespace kharm {

using Rational = boost::multiprecision::cpp_rational;
using RVec = std::vector<Rational>;

/// Plain monomial coefficients: coeffs[i] is the vector multiplying s^i.
struct PolynomialCurve {
  int n = 1;
  std::vector<RVec> coeffs;

  PolynomialCurve() = default;
  PolynomialCurve(int dim, std::vector<RVec> c) : n(dim), coeffs(std::move(c)) {
    if (n < 1) throw InvalidArgument("ambient dimension must be positive");
    for (auto& v : coeffs)
      if (static_cast<int>(v.size()) != n) throw InvalidArgument("coefficient has wrong dimension");
  }

  // Highest i with c_i != 0 (-1 for the zero polynomial).
  int degree() const {
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
      for (const auto& x : coeffs[i])
        if (x != 0) return i;
    return -1;
  }

  bool is_zero() const { return degree() < 0; }

  RVec eval(const Rational& s) const {
    RVec out(n, Rational(0));
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
      for (int d = 0; d < n; ++d) out[d] = out[d] * s + coeffs[i][d];
    return out;
  }

  PolynomialCurve derivative(int times = 1) const {
    PolynomialCurve p = *this;
    for (int t = 0; t < times; ++t) {
      std::vector<RVec> next;
      for (std::size_t i = 1; i < p.coeffs.size(); ++i) {
        RVec v = p.coeffs[i];
        for (auto& x : v) x *= static_cast<int>(i);
        next.push_back(std::move(v));
      }
      p.coeffs = std::move(next);
    }
    return p;
  }

  PolynomialCurve scaled(const Rational& c) const {
    PolynomialCurve p = *this;
    for (auto& v : p.coeffs)
      for (auto& x : v) x *= c;
    return p;
  }
};

/// e-th unit vector times s^power in E^n.
inline PolynomialCurve monomial_curve(int n, int power, int axis, const Rational& c = 1) {
  std::vector<RVec> coeffs(power + 1, RVec(n, Rational(0)));
  coeffs[power][axis] = c;
  return PolynomialCurve(n, std::move(coeffs));
}

inline PolynomialCurve operator+(const PolynomialCurve& a, const PolynomialCurve& b) {
  if (a.n != b.n) throw InvalidArgument("curves live in different dimensions");
  std::vector<RVec> c(std::max(a.coeffs.size(), b.coeffs.size()), RVec(a.n, Rational(0)));
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (int d = 0; d < a.n; ++d) c[i][d] += a.coeffs[i][d];
  for (std::size_t i = 0; i < b.coeffs.size(); ++i)
    for (int d = 0; d < a.n; ++d) c[i][d] += b.coeffs[i][d];
  return PolynomialCurve(a.n, std::move(c));
}

/// Delta^k x = (-1)^k d^{2k}x/ds^{2k} with Delta = -d^2/ds^2.
inline PolynomialCurve laplacian_power(const PolynomialCurve& curve, int k) {
  if (k < 0) throw InvalidArgument("Laplacian power must be non-negative");
  return curve.derivative(2 * k).scaled(k % 2 == 0 ? 1 : -1);
}

/// Delta^{k-1} H with H = -Delta x, i.e. (-1)^{k+1} d^{2k}x/ds^{2k}.
/// Zero exactly when deg x <= 2k-1.
inline PolynomialCurve mean_curvature_power(const PolynomialCurve& curve, int k) {
  if (k < 1) throw InvalidArgument("mean curvature power needs k >= 1");
  return curve.derivative(2 * k).scaled(k % 2 == 1 ? 1 : -1);
}

/// One coefficient of <x'(s), x'(s)> - 1, as a quadratic form in the vector
/// coefficients: sum over i <= j of weight(i, j) <a_i, a_j> = rhs.
struct QuadEquation {
  int power = 0;  // the power of s this coefficient multiplies
  std::map<std::pair<int, int>, Rational> weights;
  Rational rhs = 0;

  bool trivial() const { return weights.empty() && rhs == 0; }
  std::string to_string() const;
};

inline std::string QuadEquation::to_string() const {
  std::ostringstream os;
  bool first = true;
  // Highest pair first, matching the order the elimination reads them.
  for (auto it = weights.rbegin(); it != weights.rend(); ++it) {
    const auto& [ij, w] = *it;
    if (!first) os << " + ";
    first = false;
    if (w != 1) os << w << '*';
    if (ij.first == ij.second)
      os << "|a" << ij.first << "|^2";
    else
      os << "<a" << ij.first << ",a" << ij.second << '>';
  }
  if (first) os << '0';
  os << " = " << rhs;
  return os.str();
}

/// All coefficient equations of the unit-speed condition for a general curve
/// of degree d: powers 0 .. 2d-2 of s, i.e. 2(d-1)+1 equations.
struct ConstraintSystem {
  int degree = 1;
  std::vector<QuadEquation> equations;  // equations[j] is the s^j coefficient
};

inline ConstraintSystem general_speed_system(int d) {
  if (d < 1) throw InvalidArgument("speed constraints need degree >= 1 (degree 0 is not a curve)");
  ConstraintSystem sys;
  sys.degree = d;
  sys.equations.resize(2 * d - 1);
  for (int j = 0; j <= 2 * d - 2; ++j) sys.equations[j].power = j;
  // x' = sum_i i a_i s^{i-1}; <x', x'> picks i a_i . i' a_i' at s^{i+i'-2}.
  for (int i = 1; i <= d; ++i)
    for (int ip = i; ip <= d; ++ip) {
      Rational w = Rational(i * ip) * (i == ip ? 1 : 2);
      sys.equations[i + ip - 2].weights[{i, ip}] += w;
    }
  sys.equations[0].rhs = 1;
  return sys;
}

/// Constraint system of a concrete curve (its degree fixes the system).
inline ConstraintSystem speed_constraints(const PolynomialCurve& curve) {
  int d = curve.degree();
  if (d < 1) throw InvalidArgument("speed constraints need degree >= 1 (degree 0 is not a curve)");
  return general_speed_system(d);
}

inline Rational dot(const RVec& a, const RVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// lhs - rhs of every equation evaluated on the curve's coefficients.
inline std::vector<Rational> constraint_residuals(const ConstraintSystem& sys,
                                                  const PolynomialCurve& curve) {
  std::vector<Rational> out;
  RVec zero(curve.n, Rational(0));
  auto coeff = [&](int i) -> const RVec& {
    return i < static_cast<int>(curve.coeffs.size()) ? curve.coeffs[i] : zero;
  };
  for (const auto& eq : sys.equations) {
    Rational lhs = 0;
    for (const auto& [ij, w] : eq.weights) lhs += w * dot(coeff(ij.first), coeff(ij.second));
    out.push_back(lhs - eq.rhs);
  }
  return out;
}

inline bool is_consistent(const ConstraintSystem& sys, const PolynomialCurve& curve) {
  for (const auto& r : constraint_residuals(sys, curve))
    if (r != 0) return false;
  return true;
}

/// The polynomial <x', x'> - 1 itself, coefficient per power of s.
inline std::vector<Rational> speed_residual_polynomial(const PolynomialCurve& curve) {
  PolynomialCurve dx = curve.derivative();
  std::vector<Rational> out(std::max<std::size_t>(1, 2 * dx.coeffs.size()), Rational(0));
  for (std::size_t i = 0; i < dx.coeffs.size(); ++i)
    for (std::size_t j = 0; j < dx.coeffs.size(); ++j) out[i + j] += dot(dx.coeffs[i], dx.coeffs[j]);
  out[0] -= 1;
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

struct CertificateLine {
  int index = 0;          // coefficient a_index that was eliminated
  QuadEquation equation;  // the equation that forced it
  std::string conclusion;
  std::string to_string() const {
    return std::to_string(index) + " | " + equation.to_string() + " | " + conclusion;
  }
};

enum class CurveVerdict { StraightLine, Undetermined };

struct Classification {
  int k = 1;
  int n = 1;
  CurveVerdict verdict = CurveVerdict::Undetermined;
  std::vector<CertificateLine> certificate;
  ConstraintSystem final_system;

  std::string certificate_text() const {
    std::string s;
    for (const auto& c : certificate) s += c.to_string() + '\n';
    return s;
  }
};

namespace detail {

// Drops every term that involves a_idx (after a_idx = 0) and removes the
// equations that became trivially 0 = 0.
inline void substitute_zero(ConstraintSystem& sys, int idx) {
  std::vector<QuadEquation> kept;
  for (auto eq : sys.equations) {
    for (auto it = eq.weights.begin(); it != eq.weights.end();)
      it = (it->first.first == idx || it->first.second == idx) ? eq.weights.erase(it) : std::next(it);
    if (!eq.trivial()) kept.push_back(std::move(eq));
  }
  sys.equations = std::move(kept);
  sys.degree = idx - 1;
}

// Leading equation of the current system if it reads w |a_d|^2 = 0 with w > 0.
inline const QuadEquation* forcing_equation(const ConstraintSystem& sys) {
  const int d = sys.degree;
  for (const auto& eq : sys.equations) {
    if (eq.power != 2 * d - 2) continue;
    if (eq.rhs != 0 || eq.weights.size() != 1) return nullptr;
    auto [ij, w] = *eq.weights.begin();
    if (ij != std::make_pair(d, d) || !(w > 0)) return nullptr;
    return &eq;
  }
  return nullptr;
}

}  // namespace detail

/// Descending elimination on the general degree-(2k-1) curve in E^n. The top
/// coefficient of <x', x'> is d^2 |a_d|^2, which must vanish; over the reals a
/// sum of squares vanishes only if a_d = 0, the degree drops, repeat down to
/// d = 1, where the system is exactly {|a_1|^2 = 1}.
inline Classification classify_straight_line(int k, int n) {
  if (k < 1) throw InvalidArgument("classification needs k >= 1");
  if (n < 1) throw InvalidArgument("classification needs n >= 1");
  Classification out;
  out.k = k;
  out.n = n;
  ConstraintSystem sys = general_speed_system(2 * k - 1);
  while (sys.degree > 1) {
    const QuadEquation* eq = detail::forcing_equation(sys);
    if (!eq) return out;  // leading equation not of sum-of-squares form
    CertificateLine line;
    line.index = sys.degree;
    line.equation = *eq;
    line.conclusion = "a" + std::to_string(sys.degree) + " = 0";
    out.certificate.push_back(std::move(line));
    detail::substitute_zero(sys, sys.degree);
  }
  out.final_system = sys;
  bool final_ok = sys.equations.size() == 1 && sys.equations[0].power == 0 &&
                  sys.equations[0].rhs == 1 && sys.equations[0].weights.size() == 1 &&
                  sys.equations[0].weights.begin()->first == std::make_pair(1, 1) &&
                  sys.equations[0].weights.begin()->second == 1;
  out.verdict = final_ok ? CurveVerdict::StraightLine : CurveVerdict::Undetermined;
  return out;
}

/// Replays a certificate against a fresh general system: every line must be
/// the current leading equation and of the forcing form. True iff the replay
/// ends in exactly {|a_1|^2 = 1}.
inline bool replay_certificate(const Classification& c) {
  ConstraintSystem sys = general_speed_system(2 * c.k - 1);
  for (const auto& line : c.certificate) {
    if (line.index != sys.degree) return false;
    const QuadEquation* eq = detail::forcing_equation(sys);
    if (!eq || eq->weights != line.equation.weights || eq->rhs != line.equation.rhs ||
        eq->power != line.equation.power)
      return false;
    detail::substitute_zero(sys, sys.degree);
  }
  return sys.degree == 1 && sys.equations.size() == 1 && sys.equations[0].to_string() == "|a1|^2 = 1";
}

/// Result of sampling a polynomial curve and applying discrete central
/// differences in exact arithmetic.
struct CrossCheck {
  double discrete_sup = 0;  // sup over interior samples of |discrete Delta^{k-1} H|
  double exact_sup = 0;     // same samples, exact mean_curvature_power
  double difference = 0;    // sup |discrete - exact|
};

/// Samples x at s_i = i L/(N-1), i < N, and forms Delta^{k-1} H by repeating
/// the composed central difference (f(i+2) - 2f(i) + f(i-2))/(4h^2) -- the
/// same stencil the rough Laplacian uses -- on interior samples only.
inline CrossCheck discrete_cross_check(const PolynomialCurve& curve, int k, int N,
                                       const Rational& length = 1) {
  if (k < 1) throw InvalidArgument("cross check needs k >= 1");
  if (N < 4 * k + 4)
    throw InsufficientResolution("need N >= 4k + 4 samples (got " + std::to_string(N) + ")");
  const Rational h = length / (N - 1);
  std::vector<RVec> f(N);
  for (int i = 0; i < N; ++i) f[i] = curve.eval(h * i);
  const Rational inv = Rational(1) / (4 * h * h);
  // k applications of d^2/ds^2; the sign is applied at the end.
  int lo = 0, hi = N;  // valid range [lo, hi)
  for (int rep = 0; rep < k; ++rep) {
    std::vector<RVec> g(N, RVec(curve.n, Rational(0)));
    for (int i = lo + 2; i < hi - 2; ++i)
      for (int d = 0; d < curve.n; ++d) g[i][d] = (f[i + 2][d] - 2 * f[i][d] + f[i - 2][d]) * inv;
    f = std::move(g);
    lo += 2;
    hi -= 2;
  }
  const int sign = k % 2 == 1 ? 1 : -1;
  PolynomialCurve exact = mean_curvature_power(curve, k);
  CrossCheck out;
  for (int i = lo; i < hi; ++i) {
    RVec e = exact.eval(h * i);
    Rational dn = 0, en = 0, diff = 0;
    for (int d = 0; d < curve.n; ++d) {
      Rational v = sign * f[i][d];
      dn += v * v;
      en += e[d] * e[d];
      diff += (v - e[d]) * (v - e[d]);
    }
    out.discrete_sup = std::max(out.discrete_sup, std::sqrt(dn.convert_to<double>()));
    out.exact_sup = std::max(out.exact_sup, std::sqrt(en.convert_to<double>()));
    out.difference = std::max(out.difference, std::sqrt(diff.convert_to<double>()));
  }
  return out;
}

}  // namespace kharm
