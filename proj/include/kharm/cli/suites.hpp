#pragma once

// `verify` suites. Each one turns a property of the toolkit into named
// checks with explicit limits; the shipped configs pin the limits.

#include <cmath>
#include <string>
#include <vector>

#include "kharm/cli/build.hpp"
#include "kharm/cli/report.hpp"
#include "kharm/curve_classify.hpp"
#include "kharm/identities.hpp"

namespace kharm::cli {

namespace detail {

inline std::vector<SpaceKind> suite_spaces(const RunConfig& c, std::vector<SpaceKind> fallback) {
  if (c.verify.spaces.empty()) return fallback;
  std::vector<SpaceKind> out;
  for (const auto& s : c.verify.spaces) out.push_back(parse_space_kind(s));
  return out;
}

// Unit space form of the given kind (K = 0, 1, -1) at the configured dimension.
template <class S>
ModelSpace<S> unit_space(SpaceKind kind, int n) {
  switch (kind) {
    case SpaceKind::Sphere: return ModelSpace<S>::sphere(n, S(1));
    case SpaceKind::Hyperbolic: return ModelSpace<S>::hyperbolic(n, S(-1));
    default: return ModelSpace<S>::euclidean(n);
  }
}

inline std::string kind_name(SpaceKind k) { return std::string(to_string(k)); }

template <class S>
DiscreteMap<S> random_loop(const ModelSpace<S>& space, int N, std::uint64_t seed, int order = 2) {
  RandomCurveSpec spec;
  spec.base = RandomCurveSpec::Base::Loop;
  spec.samples = N;
  spec.seed = seed;
  spec.difference_order = order;
  return random_closed_curve(space, spec);
}

}  // namespace detail

/// Central difference of E_k along exp(tV) against -int <tau_k, V>, over
/// space forms, k, random curves and random variation fields.
template <class S>
RunResult suite_first_variation(const RunConfig& c) {
  RunResult out;
  const auto kinds = detail::suite_spaces(
      c, {SpaceKind::Euclidean, SpaceKind::Sphere, SpaceKind::Hyperbolic});
  const int k_max = c.verify.k_max > 0 ? c.verify.k_max : 6;
  const int curves = c.verify.curves, fields = c.verify.fields;
  const double tol = c.verify.tol.value_or(1e-3);
  const S dt(c.verify.dt);

  struct Row {
    double fd = 0, predicted = 0, rel = 0;
  };
  const int per_space = curves * k_max;
  const int tasks = static_cast<int>(kinds.size()) * per_space;
  std::vector<std::vector<Row>> rows(tasks);
  parallel_for(tasks, c.verify.threads, [&](int t) {
    const int si = t / per_space, ci = (t % per_space) / k_max, k = t % k_max + 1;
    auto space = detail::unit_space<S>(kinds[si], c.geometry.n);
    auto map = detail::random_loop(space, c.domain.N, c.seed * 100 + ci, c.domain.order);
    for (int fi = 0; fi < fields; ++fi) {
      auto V = random_section(map, 3, 0.3, c.seed * 10000 + 100 * ci + fi + 1);
      auto fv = first_variation(map, k, V, dt);
      rows[t].push_back({to_double(fv.finite_difference), to_double(fv.predicted),
                         to_double(fv.relative_residual())});
    }
  });

  Csv csv({"space", "k", "curve", "field", "dE_dt", "minus_int_tau_k_V", "relative_residual"});
  json worst_table = json::array();
  for (std::size_t si = 0; si < kinds.size(); ++si) {
    for (int k = 1; k <= k_max; ++k) {
      double worst = 0;
      for (int ci = 0; ci < curves; ++ci) {
        const auto& r = rows[si * per_space + ci * k_max + (k - 1)];
        for (int fi = 0; fi < fields; ++fi) {
          worst = std::max(worst, r[fi].rel);
          csv.row({detail::kind_name(kinds[si]), std::to_string(k), std::to_string(ci),
                   std::to_string(fi), csv_number(r[fi].fd), csv_number(r[fi].predicted),
                   csv_number(r[fi].rel)});
        }
      }
      out.add(check_le("first_variation " + detail::kind_name(kinds[si]) + " k=" + std::to_string(k),
                       worst, tol));
      worst_table.push_back({{"space", detail::kind_name(kinds[si])}, {"k", k}, {"worst", worst}});
    }
  }
  out.result["samples"] = c.domain.N;
  out.result["difference_order"] = c.domain.order;
  out.result["dt"] = c.verify.dt;
  out.result["worst_relative_residual"] = worst_table;
  out.add_file("first_variation.csv", csv.str());
  return out;
}

/// tau_2 from the general k-tension path against Jiang's formula.
template <class S>
RunResult suite_jiang(const RunConfig& c) {
  RunResult out;
  const auto kinds = detail::suite_spaces(
      c, {SpaceKind::Sphere, SpaceKind::Hyperbolic, SpaceKind::Euclidean});
  const int maps = c.verify.maps;
  const double tol = c.verify.tol.value_or(1e-14);
  std::vector<double> rel(maps);
  parallel_for(maps, c.verify.threads, [&](int i) {
    auto space = detail::unit_space<S>(kinds[i % kinds.size()], c.geometry.n);
    auto map = detail::random_loop(space, c.domain.N, c.seed * 1000 + i);
    auto a = k_tension_field(map, 2);
    auto b = jiang_bitension(map);
    using std::max;
    rel[i] = to_double((a - b).sup_norm() / max(S(1), b.sup_norm()));
  });
  Csv csv({"map", "space", "relative_difference"});
  double worst = 0;
  for (int i = 0; i < maps; ++i) {
    worst = std::max(worst, rel[i]);
    csv.row({std::to_string(i), detail::kind_name(kinds[i % kinds.size()]), csv_number(rel[i])});
  }
  out.add(check_le("jiang_equivalence worst of " + std::to_string(maps) + " maps", worst, tol));
  out.result["maps"] = maps;
  out.result["worst_relative_difference"] = worst;
  out.add_file("jiang.csv", csv.str());
  return out;
}

/// Root search for the proper biharmonic latitude circle.
template <class S>
RunResult suite_circle_search(const RunConfig& c) {
  using std::abs;
  using std::sqrt;
  RunResult out;
  auto space = build_space<S>(c);
  if (space.kind() != SpaceKind::Sphere || space.dim() != 2)
    config_error(c, "geometry.kind", "circle_search runs on the 2-sphere");
  const int N = c.domain.N;
  const S z = biharmonic_circle_search(space, N);
  const S R = space.radius();
  auto circle = latitude_circle(space, z, N);
  auto rep = k_tension(circle, 2);
  const double expected_z = to_double(R / sqrt(S(2)));
  const double expected_tau = to_double(S(1) / R);
  out.result["z0"] = to_double(z);
  out.result["z0_over_radius"] = to_double(z / R);
  out.result["expected_z0"] = expected_z;
  out.result["tau2_sup"] = to_double(rep.sup_norm);
  out.result["tau_sup"] = to_double(rep.tau_sup_norm);
  out.add(check_le("circle_search |z0 - R/sqrt2|", to_double(abs(z - S(expected_z))), c.verify.z_tol));
  out.add(check_le("circle_search sup|tau_2|", to_double(rep.sup_norm), c.verify.tau2_tol));
  out.add(check_le("circle_search |sup|tau| - 1/R|", to_double(abs(rep.tau_sup_norm - S(expected_tau))),
                   c.verify.tau_tol));
  return out;
}

/// The constant-curvature identity suite on the configured map.
template <class S>
RunResult suite_identities(const RunConfig& c) {
  RunResult out;
  auto map = build_map<S>(c, c.seed);
  const int k_max = c.verify.k_max > 0 ? c.verify.k_max : 6;
  std::vector<IdentityReport> reps;
  reps.push_back(check_prop_3_1(map, c.verify.tol_prop));
  for (int l = 0; l <= c.verify.l_max; ++l) reps.push_back(check_lemma_3_2(map, l, c.verify.tol_lemma));
  for (int l = 0; l <= c.verify.l_max; ++l) reps.push_back(check_lemma_3_3(map, l, c.verify.tol_lemma));
  if (map.space().curvature() != S(0)) {
    for (int order = 3; order <= k_max; ++order) {
      const double tol = order <= 4 ? c.verify.tol_low : c.verify.tol_high;
      reps.push_back(order % 2 == 0 ? check_theorem_3_4(map, order / 2, tol)
                                    : check_theorem_3_5(map, (order - 1) / 2, tol));
    }
  }
  json list = json::array();
  for (const auto& r : reps) {
    const double rel = r.residual / std::max(1.0, r.scale);
    out.add(check_le(r.name, rel, r.tol));
    list.push_back({{"name", r.name},
                    {"residual", r.residual},
                    {"scale", r.scale},
                    {"relative_residual", rel},
                    {"tol", r.tol},
                    {"tau2_sup", r.tau2_sup},
                    {"passed", r.passed}});
  }
  out.result["samples"] = map.size();
  out.result["curvature"] = to_double(map.space().curvature());
  out.result["tau_sup"] = to_double(tension(map).sup_norm());
  out.result["identities"] = list;
  return out;
}

/// Bochner formula for the 4-energy density: pointwise O(h^2) on circles,
/// observed order 2 on a warped circle, integrated form on every map.
template <class S>
RunResult suite_bochner(const RunConfig& c) {
  RunResult out;
  std::vector<int> Ns = c.verify.samples.empty() ? std::vector<int>{256, 512, 1024} : c.verify.samples;
  const double C = c.verify.tol.value_or(1.0);
  const S r(c.map.radius), warp(c.map.warp);
  Csv csv({"map", "N", "residual", "residual_over_h2", "integrated", "integrated_bound"});
  double prev = 0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const int N = Ns[i];
    auto circle = circle_map<S>(2, r, N);
    auto rc = check_bochner_e4(circle);
    const double h = to_double(circle.domain().spacing(0));
    out.add(check_le("bochner circle N=" + std::to_string(N) + " residual/h^2", rc.residual / (h * h), C));
    out.add(check_le("bochner circle N=" + std::to_string(N) + " integrated", rc.integrated,
                     rc.integrated_tol));
    csv.row({"circle", std::to_string(N), csv_number(rc.residual), csv_number(rc.residual / (h * h)),
             csv_number(rc.integrated), csv_number(rc.integrated_tol)});

    auto warped = warped_circle<S>(r, warp, N);
    auto rw = check_bochner_e4(warped);
    const double hw = to_double(warped.domain().spacing(0));
    out.add(check_le("bochner warped N=" + std::to_string(N) + " integrated", rw.integrated,
                     rw.integrated_tol));
    csv.row({"warped", std::to_string(N), csv_number(rw.residual), csv_number(rw.residual / (hw * hw)),
             csv_number(rw.integrated), csv_number(rw.integrated_tol)});
    if (i > 0) {
      const double order = std::log2(prev / rw.residual) / std::log2(double(N) / Ns[i - 1]);
      out.add(check_le("bochner warped observed order N=" + std::to_string(Ns[i - 1]) + "->" +
                           std::to_string(N) + " |p - 2|",
                       std::abs(order - 2.0), c.verify.order_tol));
    }
    prev = rw.residual;
  }
  // Integrated identity on random loops in every space form.
  const auto kinds = detail::suite_spaces(
      c, {SpaceKind::Euclidean, SpaceKind::Sphere, SpaceKind::Hyperbolic});
  const int seeds = c.has("verify.curves") ? std::max(1, c.verify.curves) : 2;
  const int tasks = static_cast<int>(kinds.size() * Ns.size()) * seeds;
  std::vector<IdentityReport> reps(tasks);
  parallel_for(tasks, c.verify.threads, [&](int t) {
    const int si = t / (Ns.size() * seeds), ni = (t / seeds) % Ns.size(), s = t % seeds;
    auto map = detail::random_loop(detail::unit_space<S>(kinds[si], 2), Ns[ni], c.seed + s);
    reps[t] = check_bochner_e4(map);
  });
  for (int t = 0; t < tasks; ++t) {
    const int si = t / (Ns.size() * seeds), ni = (t / seeds) % Ns.size(), s = t % seeds;
    std::string name = "random_" + detail::kind_name(kinds[si]) + "_seed" + std::to_string(c.seed + s);
    out.add(check_le("bochner " + name + " N=" + std::to_string(Ns[ni]) + " integrated",
                     reps[t].integrated, reps[t].integrated_tol));
    csv.row({name, std::to_string(Ns[ni]), csv_number(reps[t].residual), "", csv_number(reps[t].integrated),
             csv_number(reps[t].integrated_tol)});
  }
  out.result["radius"] = c.map.radius;
  out.result["warp"] = c.map.warp;
  out.add_file("bochner.csv", csv.str());
  return out;
}

/// Flows of perturbed geodesics in non-positively curved space forms: a run
/// that reaches sup|tau_k| < stop_tol must also be harmonic.
template <class S>
RunResult suite_nonpositive_flow(const RunConfig& c) {
  RunResult out;
  const auto kinds = detail::suite_spaces(c, {SpaceKind::Euclidean, SpaceKind::Hyperbolic});
  for (auto k : kinds)
    if (k == SpaceKind::Sphere) config_error(c, "verify.spaces", "this suite is for K <= 0");
  const std::vector<int> ks = c.verify.k_list.empty() ? std::vector<int>{2, 3} : c.verify.k_list;
  const int seeds = c.verify.seeds;
  const double harmonic_tol = c.verify.tol.value_or(1e-2);

  struct Run {
    int iterations = 0;
    std::string verdict;
    double tau_sup = 0, tau_k_sup = 0, e0 = 0, e1 = 0, max_increase = 0;
    bool converged = false;
  };
  const int tasks = static_cast<int>(kinds.size() * ks.size()) * seeds;
  std::vector<Run> runs(tasks);
  parallel_for(tasks, c.verify.threads, [&](int t) {
    const int si = t / (ks.size() * seeds), ki = (t / seeds) % ks.size(), s = t % seeds;
    RunConfig rc = c;
    rc.geometry.kind = kinds[si];
    rc.geometry.K.reset();
    rc.map.shape = "perturbed_geodesic";
    auto start = build_map<S>(rc, c.seed + s);
    FlowConfig fc = c.flow.cfg;
    fc.k = ks[ki];
    fc.seed = c.seed + s;
    Run& r = runs[t];
    try {
      auto rep = run_flow(start, fc);
      r.iterations = rep.iterations;
      r.verdict = std::string(to_string(rep.verdict));
      r.tau_sup = rep.tau_sup;
      r.tau_k_sup = rep.tau_k_sup;
      r.e0 = rep.energy.front();
      r.e1 = rep.energy.back();
      for (std::size_t i = 1; i < rep.energy.size(); ++i)
        if (fc.reparam_every == 0 || i % fc.reparam_every != 0)
          r.max_increase = std::max(r.max_increase, (rep.energy[i] - rep.energy[i - 1]) /
                                                        std::max(std::abs(rep.energy[i - 1]), 1e-300));
      r.converged = rep.verdict != FlowVerdict::MaxIters;
    } catch (const StalledStep&) {
      r.verdict = "stalled";
    }
  });

  Csv csv({"space", "k", "seed", "iterations", "verdict", "tau_sup", "tau_k_sup", "energy_initial",
           "energy_final", "max_relative_increase"});
  int counterexamples = 0, converged = 0;
  double worst_increase = 0;
  for (int t = 0; t < tasks; ++t) {
    const int si = t / (ks.size() * seeds), ki = (t / seeds) % ks.size(), s = t % seeds;
    const Run& r = runs[t];
    const std::string name = "flow " + detail::kind_name(kinds[si]) + " k=" + std::to_string(ks[ki]) +
                             " seed=" + std::to_string(c.seed + s);
    if (r.converged) {
      ++converged;
      out.add(check_le(name + " sup|tau|", r.tau_sup, harmonic_tol));
      if (!(r.tau_sup <= harmonic_tol)) ++counterexamples;
    }
    worst_increase = std::max(worst_increase, r.max_increase);
    csv.row({detail::kind_name(kinds[si]), std::to_string(ks[ki]), std::to_string(c.seed + s),
             std::to_string(r.iterations), r.verdict, csv_number(r.tau_sup), csv_number(r.tau_k_sup),
             csv_number(r.e0), csv_number(r.e1), csv_number(r.max_increase)});
  }
  out.add(check_le("nonpositive_flow counterexamples", counterexamples, 0));
  out.add(check_le("nonpositive_flow energy monotone (max relative increase)", worst_increase,
                   kEnergySlack));
  out.result["runs"] = tasks;
  out.result["converged"] = converged;
  out.result["counterexamples"] = counterexamples;
  out.add_file("flows.csv", csv.str());
  return out;
}

/// Exact straight-line classification for every (k, n) in range.
inline RunResult suite_classification(const RunConfig& c) {
  RunResult out;
  const int k_max = c.verify.k_max > 0 ? c.verify.k_max : 5;
  const int n_max = c.verify.n_max > 0 ? c.verify.n_max : 4;
  const int tasks = k_max * n_max;
  std::vector<Classification> cls(tasks);
  parallel_for(tasks, c.verify.threads,
               [&](int t) { cls[t] = classify_straight_line(t / n_max + 1, t % n_max + 1); });
  std::string certs;
  json list = json::array();
  for (int t = 0; t < tasks; ++t) {
    const auto& cl = cls[t];
    const bool straight = cl.verdict == CurveVerdict::StraightLine;
    const bool complete = static_cast<int>(cl.certificate.size()) == 2 * cl.k - 2;
    const bool final_ok = cl.final_system.equations.size() == 1 &&
                          cl.final_system.equations[0].to_string() == "|a1|^2 = 1";
    const bool replay = replay_certificate(cl);
    const std::string tag = "k=" + std::to_string(cl.k) + " n=" + std::to_string(cl.n);
    out.add(check_true("classify " + tag + " straight line, complete certificate, final |a1|^2 = 1",
                       straight && complete && final_ok && replay));
    certs += "# " + tag + "\n" + cl.certificate_text();
    list.push_back({{"k", cl.k},
                    {"n", cl.n},
                    {"verdict", straight ? "StraightLine" : "Undetermined"},
                    {"eliminated", cl.certificate.size()},
                    {"replayed", replay}});
  }
  out.result["classifications"] = list;
  out.add_file("certificates.txt", certs);
  return out;
}

/// Delta-bar^{k-1} H on discrete circles against r^{-(2k-1)}; lines give zero.
template <class S>
RunResult suite_circle_experiment(const RunConfig& c) {
  RunResult out;
  const std::vector<double> radii = c.verify.radii.empty() ? std::vector<double>{0.5, 1.0, 2.0} : c.verify.radii;
  const std::vector<int> ks = c.verify.k_list.empty() ? std::vector<int>{2, 3, 4} : c.verify.k_list;
  const double tol = c.verify.tol.value_or(0.02);
  const int N = c.domain.N;
  Csv csv({"map", "radius", "k", "sup_norm", "expected", "relative_error"});
  for (double r : radii) {
    auto circle = circle_map<S>(2, S(r), N);
    for (int k : ks) {
      const double sup = to_double(mean_curvature_power_field(circle, k).sup_norm());
      const double expected = std::pow(r, -(2 * k - 1));
      const double rel = std::abs(sup / expected - 1);
      out.add(check_le("circle r=" + csv_number(r) + " k=" + std::to_string(k) + " relative error", rel, tol));
      csv.row({"circle", csv_number(r), std::to_string(k), csv_number(sup), csv_number(expected),
               csv_number(rel)});
    }
  }
  Vec<S> a1(2), a0(2);
  a1 << S(0.6), S(0.8);
  a0 << S(0.1), S(0.2);
  auto line = line_map<S>(a1, a0, S(5), N);
  PolynomialCurve exact(2, {{Rational(1, 10), Rational(1, 5)}, {Rational(3, 5), Rational(4, 5)}});
  for (int k : ks) {
    const double sup = to_double(mean_curvature_power_field(line, k).sup_norm());
    out.add(check_le("line k=" + std::to_string(k) + " sup", sup, c.verify.line_tol));
    out.add(check_true("line k=" + std::to_string(k) + " exact mean curvature power vanishes",
                       mean_curvature_power(exact, k).is_zero()));
    csv.row({"line", "", std::to_string(k), csv_number(sup), "0", ""});
  }
  out.result["samples"] = N;
  out.add_file("circles.csv", csv.str());
  return out;
}

}  // namespace kharm::cli
