#pragma once

// Plain-text map format and atomic file writes.
//
//   kharm-map kind=sphere K=1 n=2 domain=curve L=6.283185307179586 N=64 order=2
//   <ambient coords of sample 0, space separated>
//   ...
//
// Torus domains write L=L1,L2 N=N1,N2; Euclidean seam shifts, when present,
// are written as shift0=... / shift1=... (comma-separated components).
// Doubles use shortest round-trip formatting, so write/read is bit exact.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "kharm/discrete_map.hpp"

namespace kharm {

inline std::string format_scalar(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class S>
std::string format_scalar(const S& x) {
  std::ostringstream os;
  os.precision(std::numeric_limits<S>::max_digits10);
  os << std::scientific << x;
  return os.str();
}

// Parses a full token as a scalar; returns false on any leftover characters.
inline bool parse_scalar(std::string_view text, double& out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

template <class S>
bool parse_scalar(std::string_view text, S& out) {
  double probe;
  if (!parse_scalar(text, probe)) return false;  // validates the syntax
  try {
    out = S(std::string(text));
  } catch (...) {
    return false;
  }
  return true;
}

inline bool parse_int(std::string_view text, int& out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

/// Writes `content` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace detail {

template <class S>
std::string join_vec(const Vec<S>& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_scalar(v(i));
  }
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

template <class S>
void write_map(std::ostream& os, const DiscreteMap<S>& map) {
  const auto& dom = map.domain();
  const auto& sp = map.space();
  const bool torus = dom.kind() == DomainKind::FlatTorus;
  os << "kharm-map kind=" << to_string(sp.kind()) << " K=" << format_scalar(sp.curvature())
     << " n=" << sp.dim() << " domain=" << (torus ? "torus" : "curve")
     << " L=" << format_scalar(dom.length(0));
  if (torus) os << ',' << format_scalar(dom.length(1));
  os << " N=" << dom.samples(0);
  if (torus) os << ',' << dom.samples(1);
  os << " order=" << dom.difference_order();
  for (int a = 0; a < dom.axes(); ++a)
    if (!map.seam_shift(a).isZero()) os << " shift" << a << '=' << detail::join_vec(map.seam_shift(a));
  os << '\n';
  for (int i = 0; i < map.size(); ++i) {
    for (int d = 0; d < sp.ambient_dim(); ++d) {
      if (d) os << ' ';
      os << format_scalar(map.points()(d, i));
    }
    os << '\n';
  }
}

template <class S>
std::string map_to_string(const DiscreteMap<S>& map) {
  std::ostringstream os;
  write_map(os, map);
  return os.str();
}

/// Parses the text format; errors name the offending line.
template <class S>
DiscreteMap<S> read_map(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "empty map file");
  std::istringstream hs(line);
  std::string tag;
  hs >> tag;
  if (tag != "kharm-map") throw ParseError(1, "missing kharm-map header");
  std::map<std::string, std::string> fields;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError(1, "malformed header field '" + tok + "'");
    std::string key = tok.substr(0, eq);
    static const char* known[] = {"kind", "K", "n", "domain", "L", "N", "order", "shift0", "shift1"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ParseError(1, "unknown header field '" + key + "'");
    if (!fields.emplace(key, tok.substr(eq + 1)).second)
      throw ParseError(1, "duplicate header field '" + key + "'");
  }
  for (const char* req : {"kind", "K", "n", "domain", "L", "N"})
    if (!fields.count(req)) throw ParseError(1, std::string("missing header field '") + req + "'");

  auto scalar = [](const std::string& s) {
    S v;
    if (!parse_scalar(s, v)) throw ParseError(1, "bad number '" + s + "'");
    return v;
  };
  auto integer = [](const std::string& s) {
    int v;
    if (!parse_int(s, v)) throw ParseError(1, "bad integer '" + s + "'");
    return v;
  };

  SpaceKind kind;
  try {
    kind = parse_space_kind(fields["kind"]);
  } catch (const InvalidArgument& e) {
    throw ParseError(1, e.what());
  }
  const bool torus = fields["domain"] == "torus";
  if (!torus && fields["domain"] != "curve")
    throw ParseError(1, "unknown domain '" + fields["domain"] + "'");
  auto Ls = detail::split(fields["L"], ','), Ns = detail::split(fields["N"], ',');
  const std::size_t axes = torus ? 2 : 1;
  if (Ls.size() != axes || Ns.size() != axes) throw ParseError(1, "L/N do not match the domain");
  int order = fields.count("order") ? integer(fields["order"]) : 2;

  std::optional<Domain<S>> dom;
  std::optional<ModelSpace<S>> space;
  try {
    dom = torus ? Domain<S>::flat_torus(scalar(Ls[0]), scalar(Ls[1]), integer(Ns[0]),
                                        integer(Ns[1]), order)
                : Domain<S>::closed_curve(scalar(Ls[0]), integer(Ns[0]), order);
    space = ModelSpace<S>::make(kind, integer(fields["n"]), scalar(fields["K"]));
  } catch (const InvalidArgument& e) {
    throw ParseError(1, e.what());
  }

  std::array<Vec<S>, 2> shift;
  for (int a = 0; a < 2; ++a) {
    auto it = fields.find("shift" + std::to_string(a));
    if (it == fields.end()) continue;
    auto parts = detail::split(it->second, ',');
    if (static_cast<int>(parts.size()) != space->ambient_dim())
      throw ParseError(1, "seam shift has wrong dimension");
    shift[a].resize(space->ambient_dim());
    for (std::size_t d = 0; d < parts.size(); ++d) shift[a](d) = scalar(parts[d]);
  }

  const int dim = space->ambient_dim();
  Mat<S> pts(dim, dom->size());
  for (int i = 0; i < dom->size(); ++i) {
    const int lineno = i + 2;
    if (!std::getline(is, line)) throw ParseError(lineno, "missing sample");
    std::istringstream ls(line);
    for (int d = 0; d < dim; ++d) {
      if (!(ls >> tok)) throw ParseError(lineno, "too few coordinates");
      S v;
      if (!parse_scalar(tok, v)) throw ParseError(lineno, "bad number '" + tok + "'");
      pts(d, i) = v;
    }
    if (ls >> tok) throw ParseError(lineno, "too many coordinates");
  }
  while (std::getline(is, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      throw ParseError(dom->size() + 2, "trailing data after the last sample");
  try {
    return DiscreteMap<S>(*dom, *space, std::move(pts), shift);
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
}

template <class S>
DiscreteMap<S> map_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_map<S>(is);
}

template <class S>
void save_map(const std::filesystem::path& path, const DiscreteMap<S>& map) {
  write_file_atomic(path, map_to_string(map));
}

template <class S>
DiscreteMap<S> load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_map<S>(in);
}

/// Two-column series "iteration,energy" at full precision.
inline std::string energy_trace_csv(const std::vector<double>& energy) {
  std::string out = "iteration,energy\n";
  for (std::size_t i = 0; i < energy.size(); ++i)
    out += std::to_string(i) + ',' + format_scalar(energy[i]) + '\n';
  return out;
}

}  // namespace kharm
