#pragma once

// Command dispatch and report emission. run() is pure (no files touched);
// emit() writes the bundle under an output prefix, every file atomically.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kharm/cli/build.hpp"
#include "kharm/cli/config.hpp"
#include "kharm/cli/report.hpp"
#include "kharm/cli/suites.hpp"
#include "kharm/curve_classify.hpp"
#include "kharm/flow.hpp"
#include "kharm/ktension.hpp"
#include "kharm/map_io.hpp"
#include "kharm/precision.hpp"

namespace kharm::cli {

/// Report plus every emitted file, keyed by suffix ("report.json", ...).
struct Bundle {
  RunResult run;
  json report;
  std::vector<std::pair<std::string, std::string>> files;
  bool passed() const { return run.passed(); }
};

RunResult run_command(const RunConfig& c);

namespace detail {

template <class S>
std::string field_csv(const SectionField<S>& f, const char* column) {
  Csv csv({"sample", column});
  for (int i = 0; i < f.size(); ++i)
    csv.row({std::to_string(i), csv_number(to_double(f.map->space().norm(f.at(i))))});
  return csv.str();
}

inline void apply_checks(const RunConfig& c, RunResult& out, double field_sup, double tau_sup,
                         const std::string& field) {
  if (c.check.max_sup) out.add(check_le("sup|" + field + "|", field_sup, *c.check.max_sup));
  if (c.check.min_tau_sup) out.add(check_ge("sup|tau|", tau_sup, *c.check.min_tau_sup));
}

template <class S>
RunResult cmd_tension(const RunConfig& c) {
  RunResult out;
  auto map = build_map<S>(c, c.seed);
  auto tau = tension(map);
  const double sup = to_double(tau.sup_norm()), l2 = to_double(tau.l2_norm());
  const double e1 = to_double(energy_k(map, 1));
  out.result["samples"] = map.size();
  out.result["tau_sup"] = sup;
  out.result["tau_l2"] = l2;
  out.result["energy_1"] = e1;
  out.metrics = {{"tau_sup", sup}, {"tau_l2", l2}, {"energy_1", e1}};
  apply_checks(c, out, sup, sup, "tau");
  out.add_file("field.csv", field_csv(tau, "tau_norm"));
  return out;
}

template <class S>
RunResult cmd_energy(const RunConfig& c) {
  RunResult out;
  auto map = build_map<S>(c, c.seed);
  TensionTower<S> tower(map);
  Csv csv({"order", "energy"});
  json list = json::array();
  for (int j = 1; j <= c.k; ++j) {
    const double e = to_double(energy_k(tower, j));
    csv.row({std::to_string(j), csv_number(e)});
    list.push_back({{"k", j}, {"energy", e}});
    out.metrics.emplace_back("energy_" + std::to_string(j), e);
  }
  out.result["samples"] = map.size();
  out.result["energies"] = list;
  out.add_file("energies.csv", csv.str());
  return out;
}

template <class S>
RunResult cmd_ktension(const RunConfig& c) {
  RunResult out;
  auto map = build_map<S>(c, c.seed);
  auto rep = k_tension(map, c.k);
  const double sup = to_double(rep.sup_norm), tau_sup = to_double(rep.tau_sup_norm);
  out.result["k"] = c.k;
  out.result["samples"] = map.size();
  out.result["energy"] = to_double(rep.energy);
  out.result["tau_k_sup"] = sup;
  out.result["tau_k_l2"] = to_double(rep.l2_norm);
  out.result["tau_sup"] = tau_sup;
  out.metrics = {{"energy", to_double(rep.energy)},
                 {"tau_k_sup", sup},
                 {"tau_k_l2", to_double(rep.l2_norm)},
                 {"tau_sup", tau_sup}};
  apply_checks(c, out, sup, tau_sup, "tau_" + std::to_string(c.k));
  Csv csv({"sample", "tau_k_norm", "tau_norm"});
  auto tau = tension(map);
  for (int i = 0; i < map.size(); ++i)
    csv.row({std::to_string(i), csv_number(to_double(map.space().norm(rep.tau_k.at(i)))),
             csv_number(to_double(map.space().norm(tau.at(i))))});
  out.add_file("field.csv", csv.str());
  return out;
}

template <class S>
RunResult cmd_flow(const RunConfig& c) {
  RunResult out;
  auto start = build_map<S>(c, c.seed);
  FlowConfig fc = c.flow.cfg;
  fc.k = c.k;
  fc.seed = c.seed;
  auto rep = run_flow(start, fc);
  double worst = 0;
  for (std::size_t i = 1; i < rep.energy.size(); ++i)
    if (fc.reparam_every == 0 || i % fc.reparam_every != 0)
      worst = std::max(worst, (rep.energy[i] - rep.energy[i - 1]) /
                                  std::max(std::abs(rep.energy[i - 1]), 1e-300));
  out.add(check_le("energy trace monotone (max relative increase)", worst, kEnergySlack));
  const std::string verdict(to_string(rep.verdict));
  const auto& ex = c.flow.expect;
  if (ex == "converged") out.add(check_true("flow converged", rep.verdict != FlowVerdict::MaxIters));
  if (ex == "harmonic")
    out.add(check_true("flow verdict converged_harmonic", rep.verdict == FlowVerdict::ConvergedHarmonic));
  if (ex == "proper")
    out.add(check_true("flow verdict converged_proper_k_harmonic",
                       rep.verdict == FlowVerdict::ConvergedProperKHarmonic));
  out.result["k"] = c.k;
  out.result["iterations"] = rep.iterations;
  out.result["verdict"] = verdict;
  out.result["tau_sup"] = rep.tau_sup;
  out.result["tau_k_sup"] = rep.tau_k_sup;
  out.result["energy_initial"] = rep.energy.front();
  out.result["energy_final"] = rep.energy.back();
  out.result["last_step"] = rep.last_step;
  out.metrics = {{"iterations", double(rep.iterations)},
                 {"converged", rep.verdict != FlowVerdict::MaxIters ? 1.0 : 0.0},
                 {"tau_sup", rep.tau_sup},
                 {"tau_k_sup", rep.tau_k_sup},
                 {"energy_final", rep.energy.back()}};
  out.add_file("energy.csv", energy_trace_csv(rep.energy));
  out.add_file("map.txt", map_to_string(rep.map));
  return out;
}

inline RunResult cmd_classify(const RunConfig& c) {
  RunResult out;
  auto cl = classify_straight_line(c.classify.k, c.classify.n);
  const bool straight = cl.verdict == CurveVerdict::StraightLine;
  out.add(check_true("verdict StraightLine", straight));
  out.add(check_true("certificate replays", replay_certificate(cl)));
  out.add(check_true("final system is |a1|^2 = 1", cl.final_system.equations.size() == 1 &&
                                                       cl.final_system.equations[0].to_string() ==
                                                           "|a1|^2 = 1"));
  json cert = json::array(), fin = json::array();
  for (const auto& line : cl.certificate) cert.push_back(line.to_string());
  for (const auto& eq : cl.final_system.equations) fin.push_back(eq.to_string());
  out.result["k"] = cl.k;
  out.result["n"] = cl.n;
  out.result["verdict"] = straight ? "StraightLine" : "Undetermined";
  out.result["certificate"] = cert;
  out.result["final_system"] = fin;
  out.add_file("certificate.txt", cl.certificate_text());
  return out;
}

template <class S>
RunResult cmd_verify(const RunConfig& c) {
  const auto& s = c.verify.suite;
  if (s == "first_variation") return suite_first_variation<S>(c);
  if (s == "jiang") return suite_jiang<S>(c);
  if (s == "circle_search") return suite_circle_search<S>(c);
  if (s == "identities") return suite_identities<S>(c);
  if (s == "bochner") return suite_bochner<S>(c);
  if (s == "nonpositive_flow") return suite_nonpositive_flow<S>(c);
  if (s == "circle_experiment") return suite_circle_experiment<S>(c);
  if (s == "classification") return suite_classification(c);
  throw ParseError(c.line("verify.suite"), "unknown suite '" + s + "'");
}

inline bool is_integer_parameter(const std::string& p) { return p == "N" || p == "k" || p == "seed"; }

inline void apply_parameter(RunConfig& c, const std::string& p, double v) {
  if (p == "radius" || p == "r") c.map.radius = v;
  else if (p == "z0") c.map.z0 = v;
  else if (p == "rho") c.map.rho = v;
  else if (p == "K") c.geometry.K = v;
  else if (p == "N") c.domain.N = static_cast<int>(v);
  else if (p == "k") c.k = static_cast<int>(v);
  else if (p == "seed") c.seed = static_cast<std::uint64_t>(v);
  else if (p == "amplitude") c.map.amplitude = v;
  else if (p == "warp") c.map.warp = v;
  else if (p == "step") c.flow.cfg.step = v;
}

inline std::vector<double> sweep_values(const SweepBlock& s) {
  std::vector<double> out;
  for (int i = 0; i < s.steps; ++i) {
    double v = s.steps == 1 ? s.from : (s.from * (s.steps - 1 - i) + s.to * i) / (s.steps - 1);
    if (is_integer_parameter(s.parameter)) v = std::round(v);
    out.push_back(v);
  }
  return out;
}

inline RunResult cmd_sweep(const RunConfig& c) {
  RunResult out;
  const auto values = sweep_values(c.sweep);
  const Command inner = *parse_command(c.sweep.run);
  std::vector<RunConfig> entries;
  for (double v : values) {
    RunConfig e = c;
    e.command = inner;
    apply_parameter(e, c.sweep.parameter, v);
    try {
      validate(e);
    } catch (const ParseError& err) {
      throw ParseError(err.line ? err.line : c.line("sweep.parameter"),
                       "sweep value " + csv_number(v) + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  std::vector<RunResult> results(entries.size());
  parallel_for(static_cast<int>(entries.size()), c.sweep.threads, [&](int i) {
    try {
      results[i] = run_command(entries[i]);
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });

  std::vector<std::string> columns;
  for (const auto& r : results)
    if (r.error.empty()) {
      for (const auto& [name, _] : r.metrics) columns.push_back(name);
      break;
    }
  std::vector<std::string> header{c.sweep.parameter, "passed"};
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("error");
  Csv csv(header);
  json list = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::vector<std::string> row{csv_number(values[i]), r.passed() ? "1" : "0"};
    json entry;
    entry["parameter"] = values[i];
    entry["passed"] = r.passed();
    json metrics = json::object();
    for (const auto& col : columns) {
      std::string cell;
      for (const auto& [name, v] : r.metrics)
        if (name == col) {
          cell = csv_number(v);
          metrics[name] = v;
        }
      row.push_back(cell);
    }
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    row.push_back(err);
    csv.row(row);
    entry["metrics"] = metrics;
    if (!r.error.empty()) entry["error"] = r.error;
    json checks = json::array();
    for (const auto& ck : r.checks) checks.push_back(to_json(ck));
    entry["checks"] = checks;
    list.push_back(entry);
    out.add(check_true("sweep " + c.sweep.parameter + "=" + csv_number(values[i]), r.passed()));
  }
  out.result["parameter"] = c.sweep.parameter;
  out.result["run"] = c.sweep.run;
  out.result["entries"] = list;
  out.add_file("sweep.csv", csv.str());
  return out;
}

template <class S>
RunResult dispatch(const RunConfig& c) {
  switch (*c.command) {
    case Command::Tension: return cmd_tension<S>(c);
    case Command::Energy: return cmd_energy<S>(c);
    case Command::KTension: return cmd_ktension<S>(c);
    case Command::Flow: return cmd_flow<S>(c);
    case Command::Verify: return cmd_verify<S>(c);
    case Command::Classify: return cmd_classify(c);
    case Command::Sweep: return cmd_sweep(c);
  }
  throw ParseError(0, "no command");
}

}  // namespace detail

/// Bundle = command result + report JSON + every file to emit. Module
/// failures (stalled flow, failed search, violated hypothesis) become a
/// failed bundle carrying the diagnostic; config problems propagate as
/// ParseError / InvalidArgument.
Bundle run(const RunConfig& c);
void emit(const Bundle& b, const std::filesystem::path& prefix);

namespace detail {

inline std::map<std::string, std::string> read_outputs(const std::filesystem::path& prefix,
                                                       const Bundle& b) {
  std::map<std::string, std::string> out;
  for (const auto& [suffix, _] : b.files) {
    std::filesystem::path p = prefix;
    p += "." + suffix;
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[suffix] = ss.str();
  }
  return out;
}

/// Runs the target config `repeats` times into separate prefixes and
/// compares every emitted file byte for byte.
inline RunResult suite_determinism(const RunConfig& c) {
  RunResult out;
  const auto target_path = c.resolve(c.verify.target);
  RunConfig target = load_config(target_path);
  if (!target.command) throw ParseError(c.line("verify.target"), "target config names no command");
  target.seed = c.has("seed") ? c.seed : target.seed;
  validate(target);
  const std::filesystem::path base =
      c.out.empty() ? std::filesystem::path("determinism") : std::filesystem::path(c.out);
  std::vector<std::map<std::string, std::string>> outputs;
  bool target_passed = true;
  for (int r = 0; r < c.verify.repeats; ++r) {
    std::filesystem::path prefix = base;
    prefix += ".runs";
    prefix /= "run" + std::to_string(r);
    prefix /= target_path.stem();
    Bundle b = run(target);
    emit(b, prefix);
    outputs.push_back(read_outputs(prefix, b));
    target_passed = target_passed && b.passed();
  }
  for (const auto& [suffix, content] : outputs.front()) {
    int mismatches = 0;
    for (std::size_t r = 1; r < outputs.size(); ++r) {
      auto it = outputs[r].find(suffix);
      if (it == outputs[r].end() || it->second != content) ++mismatches;
    }
    out.add(check_le("byte-identical " + suffix + " over " + std::to_string(outputs.size()) + " runs",
                     mismatches, 0));
  }
  out.result["target"] = c.verify.target;
  out.result["repeats"] = c.verify.repeats;
  out.result["target_passed"] = target_passed;
  json files = json::array();
  for (const auto& [suffix, content] : outputs.front())
    files.push_back({{"file", suffix}, {"bytes", content.size()}});
  out.result["files"] = files;
  return out;
}

}  // namespace detail

inline RunResult run_command(const RunConfig& c) {
  if (!c.command) throw ParseError(0, "no command given");
  if (*c.command == Command::Verify && c.verify.suite == "determinism") return detail::suite_determinism(c);
  return c.precision == "quad" ? detail::dispatch<quad>(c) : detail::dispatch<double>(c);
}

inline Bundle run(const RunConfig& c) {
  Bundle b;
  try {
    b.run = run_command(c);
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidArgument&) {
    throw;
  } catch (const std::exception& e) {
    b.run = RunResult{};
    b.run.error = e.what();
  }
  json& r = b.report;
  r["tool"] = kToolName;
  r["version"] = kToolVersion;
  r["command"] = to_string(*c.command);
  r["precision"] = c.precision;
  r["seed"] = c.seed;
  json echo = json::object();
  for (const auto& [k, v] : c.echo) echo[k] = v;
  r["config"] = echo;
  r["passed"] = b.passed();
  if (!b.run.error.empty()) r["error"] = b.run.error;
  json checks = json::array();
  for (const auto& ck : b.run.checks) checks.push_back(to_json(ck));
  r["checks"] = checks;
  r["result"] = b.run.result;
  b.files.emplace_back("report.json", r.dump(2) + "\n");
  if (!b.run.checks.empty()) b.files.emplace_back("checks.csv", checks_csv(b.run.checks));
  for (const auto& f : b.run.files) b.files.push_back(f);
  return b;
}

inline void emit(const Bundle& b, const std::filesystem::path& prefix) {
  for (const auto& [suffix, content] : b.files) {
    std::filesystem::path p = prefix;
    p += "." + suffix;
    write_file_atomic(p, content);
  }
}

}  // namespace kharm::cli
