#pragma once

#include <stdexcept>
#include <string>

namespace gibbsforge {

enum class ErrorKind {
  point_outside_domain,
  no_preimage,
  invalid_parameter,
  unknown_map,
  unknown_potential,
  orbit_escaped,
  no_convergence,
  interval_spans_branches,
  degenerate_ball,
  not_hyperbolic_time,
  degenerate_density,
  grid_too_coarse,
  hypothesis_violated,
  config_parse_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::point_outside_domain: return "PointOutsideDomain";
    case ErrorKind::no_preimage: return "NoPreimage";
    case ErrorKind::invalid_parameter: return "InvalidParameter";
    case ErrorKind::unknown_map: return "UnknownMap";
    case ErrorKind::unknown_potential: return "UnknownPotential";
    case ErrorKind::orbit_escaped: return "OrbitEscaped";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::interval_spans_branches: return "IntervalSpansBranches";
    case ErrorKind::degenerate_ball: return "DegenerateBall";
    case ErrorKind::not_hyperbolic_time: return "NotHyperbolicTime";
    case ErrorKind::degenerate_density: return "DegenerateDensity";
    case ErrorKind::grid_too_coarse: return "GridTooCoarse";
    case ErrorKind::hypothesis_violated: return "HypothesisViolated";
    case ErrorKind::config_parse_error: return "ConfigParseError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Power iteration ran out of iterations; carries the count for reporting.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, long iterations)
      : Error(ErrorKind::no_convergence,
              what + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}

  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

/// An orbit left the map's domain at the given step.
class OrbitEscapedError : public Error {
 public:
  OrbitEscapedError(double x0, long step)
      : Error(ErrorKind::orbit_escaped, "orbit of " + std::to_string(x0) +
                                            " left the domain at step " +
                                            std::to_string(step)),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace gibbsforge
