#pragma once

// Error taxonomy shared by all modules.  Every failure mode that callers are
// expected to handle gets its own type; plain std::invalid_argument is used
// for programmer errors (bad arguments that a correct caller never passes).

#include <stdexcept>
#include <string>

namespace nutaxis {

// Configuration rejected before any computation ran (bad key, bad value,
// failed cross-validation).  The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A time step produced an undershoot below -positivity_floor in u.
// The driver reacts by halving dt and retrying.
struct PositivityViolation : std::runtime_error {
    explicit PositivityViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Tridiagonal solve broke down (should be unreachable: the implicit matrix
// is strictly diagonally dominant by construction).
struct SolveFailure : std::runtime_error {
    explicit SolveFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// A monitored integral evaluated to NaN/Inf (e.g. v collapsed towards
// machine zero).  Reported, never silently clipped.
struct NonFiniteFunctional : std::runtime_error {
    explicit NonFiniteFunctional(const std::string& msg) : std::runtime_error(msg) {}
};

// I/O layer failure: unreadable file, malformed snapshot or CSV.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nutaxis
