#pragma once

// Report bundle pieces shared by the commands: pass/fail checks, emitted
// files, CSV helpers and a small index-ordered parallel loop.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kharm/map_io.hpp"

namespace kharm::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "kharm";
inline constexpr const char* kToolVersion = "0.1.0";

struct Check {
  std::string name;
  double value = 0;
  std::string relation = "<=";
  double limit = 0;
  bool passed = false;
};

inline Check check_le(std::string name, double value, double limit) {
  return {std::move(name), value, "<=", limit, value <= limit};  // NaN fails
}

inline Check check_ge(std::string name, double value, double limit) {
  return {std::move(name), value, ">=", limit, value >= limit};
}

inline Check check_true(std::string name, bool ok) {
  return {std::move(name), ok ? 1.0 : 0.0, "==", 1.0, ok};
}

/// What one command produced, before it is written anywhere.
struct RunResult {
  json result = json::object();
  std::vector<Check> checks;
  // (suffix, content); the report itself is added by finish().
  std::vector<std::pair<std::string, std::string>> files;
  // Scalar columns for sweep tables.
  std::vector<std::pair<std::string, double>> metrics;
  std::string error;

  bool passed() const {
    return error.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void add(Check c) { checks.push_back(std::move(c)); }
  void add_file(std::string suffix, std::string content) {
    files.emplace_back(std::move(suffix), std::move(content));
  }
};

inline json to_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["relation"] = c.relation;
  j["limit"] = c.limit;
  j["passed"] = c.passed;
  return j;
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_scalar(x);
}

/// Minimal CSV builder: header first, then rows of already formatted cells.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(std::move(header)); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

inline std::string checks_csv(const std::vector<Check>& checks) {
  Csv csv({"check", "value", "relation", "limit", "passed"});
  for (const auto& c : checks)
    csv.row({c.name, csv_number(c.value), c.relation, csv_number(c.limit), c.passed ? "1" : "0"});
  return csv.str();
}

/// Runs fn(0..n-1) on up to `threads` workers (0: hardware concurrency).
/// Callers write results by index, so output order never depends on
/// scheduling. The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(int n, int threads, F&& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace kharm::cli
