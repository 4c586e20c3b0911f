#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

// Co-located endpoints (d = 0): traces are pre-validated, so this is a caller bug.
struct DegenerateGeometryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Zero achievable rate on a link that is asked to carry content.
struct UnreachableLinkError : std::domain_error {
  using std::domain_error::domain_error;
};

// Malformed trace/graph file; carries the 1-based row that failed.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, long row_number)
      : std::runtime_error(msg + " (row " + std::to_string(row_number) + ")"), row(row_number) {}
  long row;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure inside the LP machinery; distinct from an infeasible verdict.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace d2d
