#pragma once

#include <stdexcept>
#include <string>

namespace estop {

// Invalid argument to a library function (bad deceleration sign, bad grid
// dimensions, negative weights, ...).
struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent planner configuration (grid spacing vs. valve speed, field
// not matching the planning horizon, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Candidate set became empty after applying the braking-distance cap.
struct InfeasibleCapError : ConfigError {
  using ConfigError::ConfigError;
};

// Malformed data file. `line` is 1-based, or -1 when not applicable.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line(line) {}
  long line;
};

// Requested (t,s) has no failure time in the queried regime.
struct OutOfRegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density evaluation at (or beyond) a vanishing discriminant.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace estop
