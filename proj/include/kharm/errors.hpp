#pragma once

#include <stdexcept>
#include <string>

namespace kharm {

// Inputs that break a documented invariant (bad k, wrong shapes, mismatched bases).
using InvalidArgument = std::invalid_argument;

// A map collapsed or otherwise cannot support the requested geometry.
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An identity check was called on a map that violates the hypothesis of the
// identity (e.g. not an isometric immersion).
struct PreconditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Backtracking exhausted its halvings without an energy decrease.
struct StalledStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bracketing root search found no sign change.
struct SearchFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientResolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration text problem; carries the offending line (0 when not line bound).
struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? what + ", line " + std::to_string(line) : what),
        line(line) {}
  int line;
};

}  // namespace kharm
