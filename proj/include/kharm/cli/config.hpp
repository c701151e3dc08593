#pragma once

// Run configuration: flat `key = value` lines grouped by `[section]`
// headers, `#` comments. Every key is checked against a fixed schema, so a
// typo is an error that names its line.
//
//   command = verify
//   precision = quad
//   [geometry]
//   kind = sphere
//   K = 1
//   [map]
//   shape = biharmonic_circle
//   [verify]
//   suite = identities

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kharm/errors.hpp"
#include "kharm/flow.hpp"
#include "kharm/map_io.hpp"
#include "kharm/model_space.hpp"

namespace kharm::cli {

enum class Command { Tension, Energy, KTension, Flow, Verify, Classify, Sweep };

inline constexpr std::pair<Command, const char*> kCommandNames[] = {
    {Command::Tension, "tension"}, {Command::Energy, "energy"},   {Command::KTension, "ktension"},
    {Command::Flow, "flow"},       {Command::Verify, "verify"},   {Command::Classify, "classify"},
    {Command::Sweep, "sweep"}};

inline std::optional<Command> parse_command(std::string_view s) {
  for (const auto& [c, name] : kCommandNames)
    if (s == name) return c;
  return std::nullopt;
}

inline const char* to_string(Command c) {
  for (const auto& [cc, name] : kCommandNames)
    if (cc == c) return name;
  return "?";
}

struct GeometryBlock {
  SpaceKind kind = SpaceKind::Euclidean;
  std::optional<double> K;  // defaults 0 / 1 / -1 by kind
  int n = 2;
};

struct DomainBlock {
  std::optional<double> L;  // only for shapes without a natural length
  int N = 256;
  int order = 2;
};

struct MapBlock {
  std::string shape = "circle";
  double radius = 1.0;
  std::optional<double> z0;
  double rho = 1.0;
  double warp = 0.3;
  double a = 2.0, b = 1.0;
  double amplitude = 0.1;
  int modes = 0;  // 0: N/8 for perturbed geodesics, 3 for random loops
  std::vector<double> direction, offset;
  std::string path;
};

struct FlowBlock {
  FlowConfig cfg;
  std::string expect = "any";  // any | converged | harmonic | proper
};

struct SweepBlock {
  std::string parameter;
  double from = 0, to = 0;
  int steps = 0;
  std::string run = "ktension";
  int threads = 0;  // 0: hardware concurrency
};

struct VerifyBlock {
  std::string suite;
  std::vector<std::string> spaces;
  std::vector<int> k_list;
  std::vector<int> samples;
  std::vector<double> radii;
  std::optional<double> tol;
  int k_max = 0;
  int n_max = 0;
  int curves = 5, fields = 5, maps = 100, seeds = 20;
  double dt = 1e-4;
  double z_tol = 1e-3, tau2_tol = 1e-6, tau_tol = 1e-2;
  double tol_prop = 1e-3, tol_lemma = 1e-2, tol_low = 1e-2, tol_high = 5e-2;
  double line_tol = 1e-12, order_tol = 0.2;
  int l_max = 2;
  std::string target;
  int repeats = 2;
  int threads = 0;
};

struct ClassifyBlock {
  int k = 0, n = 0;
};

struct CheckBlock {
  std::optional<double> max_sup;
  std::optional<double> min_tau_sup;
};

struct RunConfig {
  std::optional<Command> command;
  int k = 2;
  std::uint64_t seed = 1;
  std::string precision = "double";
  std::string out;

  GeometryBlock geometry;
  DomainBlock domain;
  MapBlock map;
  FlowBlock flow;
  SweepBlock sweep;
  VerifyBlock verify;
  ClassifyBlock classify;
  CheckBlock check;

  // Keys as written, in file order, for the report's config echo.
  std::vector<std::pair<std::string, std::string>> echo;
  std::map<std::string, int> lines;
  std::filesystem::path base_dir;

  bool has(const std::string& key) const { return lines.count(key) > 0; }
  int line(const std::string& key) const {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  }
  double curvature() const {
    if (geometry.K) return *geometry.K;
    switch (geometry.kind) {
      case SpaceKind::Sphere: return 1.0;
      case SpaceKind::Hyperbolic: return -1.0;
      default: return 0.0;
    }
  }
  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
};

// Validation failure tied to a config key (line 0 when the key was defaulted).
[[noreturn]] inline void config_error(const RunConfig& c, const std::string& key,
                                      const std::string& msg) {
  throw ParseError(c.line(key), key + ": " + msg);
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double as_real(const std::string& v, int line) {
  double x;
  if (!parse_scalar(v, x)) throw ParseError(line, "expected a number, got '" + v + "'");
  return x;
}

inline int as_int(const std::string& v, int line) {
  int x;
  if (!parse_int(v, x)) throw ParseError(line, "expected an integer, got '" + v + "'");
  return x;
}

inline std::uint64_t as_u64(const std::string& v, int line) {
  std::uint64_t x;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ParseError(line, "expected a non-negative integer, got '" + v + "'");
  return x;
}

inline std::vector<std::string> as_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& part : kharm::detail::split(v, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline std::vector<double> as_reals(const std::string& v, int line) {
  std::vector<double> out;
  for (auto& t : as_list(v)) out.push_back(as_real(t, line));
  if (out.empty()) throw ParseError(line, "expected a comma-separated list of numbers");
  return out;
}

inline std::vector<int> as_ints(const std::string& v, int line) {
  std::vector<int> out;
  for (auto& t : as_list(v)) out.push_back(as_int(t, line));
  if (out.empty()) throw ParseError(line, "expected a comma-separated list of integers");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

#define KHARM_REAL(key, field) {key, [](RunConfig& c, const std::string& v, int l) { c.field = as_real(v, l); }}
#define KHARM_INT(key, field) {key, [](RunConfig& c, const std::string& v, int l) { c.field = as_int(v, l); }}
#define KHARM_STR(key, field) {key, [](RunConfig& c, const std::string& v, int) { c.field = v; }}

inline const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> table = {
      {"command",
       [](RunConfig& c, const std::string& v, int l) {
         c.command = parse_command(v);
         if (!c.command) throw ParseError(l, "unknown command '" + v + "'");
       }},
      KHARM_INT("k", k),
      {"seed", [](RunConfig& c, const std::string& v, int l) { c.seed = as_u64(v, l); }},
      {"precision",
       [](RunConfig& c, const std::string& v, int l) {
         if (v != "double" && v != "quad") throw ParseError(l, "precision must be double or quad");
         c.precision = v;
       }},
      KHARM_STR("out", out),

      {"geometry.kind",
       [](RunConfig& c, const std::string& v, int l) {
         try {
           c.geometry.kind = parse_space_kind(v);
         } catch (const InvalidArgument& e) {
           throw ParseError(l, e.what());
         }
       }},
      {"geometry.K", [](RunConfig& c, const std::string& v, int l) { c.geometry.K = as_real(v, l); }},
      KHARM_INT("geometry.n", geometry.n),

      {"domain.L", [](RunConfig& c, const std::string& v, int l) { c.domain.L = as_real(v, l); }},
      KHARM_INT("domain.N", domain.N),
      KHARM_INT("domain.order", domain.order),

      KHARM_STR("map.shape", map.shape),
      KHARM_REAL("map.radius", map.radius),
      {"map.z0", [](RunConfig& c, const std::string& v, int l) { c.map.z0 = as_real(v, l); }},
      KHARM_REAL("map.rho", map.rho),
      KHARM_REAL("map.warp", map.warp),
      KHARM_REAL("map.a", map.a),
      KHARM_REAL("map.b", map.b),
      KHARM_REAL("map.amplitude", map.amplitude),
      KHARM_INT("map.modes", map.modes),
      {"map.direction",
       [](RunConfig& c, const std::string& v, int l) { c.map.direction = as_reals(v, l); }},
      {"map.offset", [](RunConfig& c, const std::string& v, int l) { c.map.offset = as_reals(v, l); }},
      KHARM_STR("map.path", map.path),

      KHARM_REAL("flow.step", flow.cfg.step),
      KHARM_INT("flow.max_iters", flow.cfg.max_iters),
      KHARM_REAL("flow.stop_tol", flow.cfg.stop_tol),
      KHARM_INT("flow.reparam_every", flow.cfg.reparam_every),
      KHARM_REAL("flow.growth", flow.cfg.growth),
      KHARM_STR("flow.expect", flow.expect),

      KHARM_STR("sweep.parameter", sweep.parameter),
      KHARM_REAL("sweep.from", sweep.from),
      KHARM_REAL("sweep.to", sweep.to),
      KHARM_INT("sweep.steps", sweep.steps),
      KHARM_STR("sweep.run", sweep.run),
      KHARM_INT("sweep.threads", sweep.threads),

      KHARM_STR("verify.suite", verify.suite),
      {"verify.spaces", [](RunConfig& c, const std::string& v, int) { c.verify.spaces = as_list(v); }},
      {"verify.k_list", [](RunConfig& c, const std::string& v, int l) { c.verify.k_list = as_ints(v, l); }},
      {"verify.samples",
       [](RunConfig& c, const std::string& v, int l) { c.verify.samples = as_ints(v, l); }},
      {"verify.radii", [](RunConfig& c, const std::string& v, int l) { c.verify.radii = as_reals(v, l); }},
      {"verify.tol", [](RunConfig& c, const std::string& v, int l) { c.verify.tol = as_real(v, l); }},
      KHARM_INT("verify.k_max", verify.k_max),
      KHARM_INT("verify.n_max", verify.n_max),
      KHARM_INT("verify.curves", verify.curves),
      KHARM_INT("verify.fields", verify.fields),
      KHARM_INT("verify.maps", verify.maps),
      KHARM_INT("verify.seeds", verify.seeds),
      KHARM_REAL("verify.dt", verify.dt),
      KHARM_REAL("verify.z_tol", verify.z_tol),
      KHARM_REAL("verify.tau2_tol", verify.tau2_tol),
      KHARM_REAL("verify.tau_tol", verify.tau_tol),
      KHARM_REAL("verify.tol_prop", verify.tol_prop),
      KHARM_REAL("verify.tol_lemma", verify.tol_lemma),
      KHARM_REAL("verify.tol_low", verify.tol_low),
      KHARM_REAL("verify.tol_high", verify.tol_high),
      KHARM_REAL("verify.line_tol", verify.line_tol),
      KHARM_REAL("verify.order_tol", verify.order_tol),
      KHARM_INT("verify.l_max", verify.l_max),
      KHARM_STR("verify.target", verify.target),
      KHARM_INT("verify.repeats", verify.repeats),
      KHARM_INT("verify.threads", verify.threads),

      KHARM_INT("classify.k", classify.k),
      KHARM_INT("classify.n", classify.n),

      {"check.max_sup", [](RunConfig& c, const std::string& v, int l) { c.check.max_sup = as_real(v, l); }},
      {"check.min_tau_sup",
       [](RunConfig& c, const std::string& v, int l) { c.check.min_tau_sup = as_real(v, l); }},
  };
  return table;
}

#undef KHARM_REAL
#undef KHARM_INT
#undef KHARM_STR

}  // namespace detail

/// Parses config text. Syntax and type errors, unknown keys and repeated
/// keys throw ParseError naming the line. Cross-field checks happen later,
/// in validate().
inline RunConfig parse_config(const std::string& text, std::filesystem::path base_dir = {}) {
  RunConfig cfg;
  cfg.base_dir = std::move(base_dir);
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  static const char* sections[] = {"geometry", "domain", "map",      "flow",
                                   "sweep",    "verify", "classify", "check"};
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (std::find(std::begin(sections), std::end(sections), section) == std::end(sections))
        throw ParseError(lineno, "unknown section '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;
    const auto& table = detail::schema();
    auto it = table.find(full);
    if (it == table.end()) throw ParseError(lineno, "unknown key '" + full + "'");
    if (value.empty()) throw ParseError(lineno, "missing value for '" + full + "'");
    if (cfg.lines.count(full)) throw ParseError(lineno, "duplicate key '" + full + "'");
    it->second(cfg, value, lineno);
    cfg.lines[full] = lineno;
    cfg.echo.emplace_back(full, value);
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

namespace detail {

inline void require_keys(const RunConfig& c, std::initializer_list<const char*> keys,
                         const char* what) {
  for (const char* k : keys)
    if (!c.has(k)) throw ParseError(0, std::string("missing required key '") + k + "' for " + what);
}

}  // namespace detail

/// Cross-field validation against the module preconditions. Requires the
/// command to be set.
inline void validate(const RunConfig& c) {
  if (!c.command) throw ParseError(0, "no command given");
  const Command cmd = *c.command;
  if (c.k < 1) config_error(c, "k", "k must be >= 1");
  if (c.geometry.n < 1) config_error(c, "geometry.n", "dimension must be >= 1");
  const double K = c.curvature();
  if (c.geometry.kind == SpaceKind::Euclidean && K != 0)
    config_error(c, "geometry.K", "Euclidean space has K = 0");
  if (c.geometry.kind == SpaceKind::Sphere && !(K > 0))
    config_error(c, "geometry.K", "a sphere needs K > 0");
  if (c.geometry.kind == SpaceKind::Hyperbolic && !(K < 0))
    config_error(c, "geometry.K", "hyperbolic space needs K < 0");
  if (c.domain.N < 8) config_error(c, "domain.N", "at least 8 samples required");
  if (c.domain.order != 2 && c.domain.order != 4)
    config_error(c, "domain.order", "difference order must be 2 or 4");
  if (c.domain.L && !(*c.domain.L > 0)) config_error(c, "domain.L", "length must be positive");

  static const char* shapes[] = {"circle",         "line",          "latitude",      "great_circle",
                                 "biharmonic_circle", "hyperbolic_circle", "ellipse", "warped_circle",
                                 "clifford_torus", "perturbed_geodesic", "random_loop", "file"};
  if (std::find(std::begin(shapes), std::end(shapes), c.map.shape) == std::end(shapes))
    config_error(c, "map.shape", "unknown shape '" + c.map.shape + "'");
  if (c.map.shape == "file" && c.map.path.empty()) config_error(c, "map.path", "shape = file needs a path");
  if (c.map.modes < 0) config_error(c, "map.modes", "must be non-negative");

  if (cmd == Command::Flow || (cmd == Command::Sweep && c.sweep.run == "flow")) {
    const auto& f = c.flow.cfg;
    if (!(f.step > 0)) config_error(c, "flow.step", "step must be positive");
    if (!(f.stop_tol > 0)) config_error(c, "flow.stop_tol", "stop tolerance must be positive");
    if (f.max_iters < 0) config_error(c, "flow.max_iters", "must be non-negative");
    if (f.reparam_every < 0) config_error(c, "flow.reparam_every", "must be non-negative");
    if (!(f.growth >= 1)) config_error(c, "flow.growth", "must be >= 1");
    static const char* expects[] = {"any", "converged", "harmonic", "proper"};
    if (std::find(std::begin(expects), std::end(expects), c.flow.expect) == std::end(expects))
      config_error(c, "flow.expect", "expected any, converged, harmonic or proper");
  }
  if (cmd == Command::Classify) {
    detail::require_keys(c, {"classify.k", "classify.n"}, "classify");
    if (c.classify.k < 1) config_error(c, "classify.k", "k must be >= 1");
    if (c.classify.n < 1) config_error(c, "classify.n", "n must be >= 1");
  }
  if (cmd == Command::Sweep) {
    detail::require_keys(c, {"sweep.parameter", "sweep.from", "sweep.to", "sweep.steps"}, "sweep");
    static const char* params[] = {"radius", "r",   "z0", "rho",  "K",         "N",
                                   "k",      "seed", "amplitude", "warp", "step"};
    if (std::find(std::begin(params), std::end(params), c.sweep.parameter) == std::end(params))
      config_error(c, "sweep.parameter", "cannot sweep '" + c.sweep.parameter + "'");
    if (c.sweep.steps < 1) config_error(c, "sweep.steps", "need at least one step");
    auto run = parse_command(c.sweep.run);
    if (!run || *run == Command::Sweep || *run == Command::Classify)
      config_error(c, "sweep.run", "sweeps run tension, energy, ktension, flow or verify");
  }
  if (cmd == Command::Verify) {
    detail::require_keys(c, {"verify.suite"}, "verify");
    static const char* suites[] = {"first_variation", "jiang",           "circle_search",
                                   "identities",      "bochner",         "nonpositive_flow",
                                   "classification",  "circle_experiment", "determinism"};
    if (std::find(std::begin(suites), std::end(suites), c.verify.suite) == std::end(suites))
      config_error(c, "verify.suite", "unknown suite '" + c.verify.suite + "'");
    if (c.verify.suite == "determinism" && c.verify.target.empty())
      config_error(c, "verify.target", "determinism needs a target config");
    if (c.verify.repeats < 2) config_error(c, "verify.repeats", "need at least two runs");
    for (const auto& s : c.verify.spaces) {
      try {
        parse_space_kind(s);
      } catch (const InvalidArgument&) {
        config_error(c, "verify.spaces", "unknown space '" + s + "'");
      }
    }
  }
}

}  // namespace kharm::cli
