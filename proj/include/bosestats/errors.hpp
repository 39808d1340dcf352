#pragma once

#include <stdexcept>
#include <string>

namespace bosestats {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or plan input (CLI exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Potential minimization escaped the search region (no bound state).
class NoMinimumError : public Error {
public:
    using Error::Error;
};

/// Potential decreases monotonically on both sides of the minimum.
class NoBarrierError : public Error {
public:
    using Error::Error;
};

/// Hessian at the candidate minimum is not positive definite.
class NotAMinimumError : public Error {
public:
    using Error::Error;
};

/// Root bracketing failed (inconsistent geometry for the requested anchor).
class BracketFailureError : public Error {
public:
    using Error::Error;
};

/// Adaptive integration did not reach tolerance within the evaluation budget.
class QuadratureFailureError : public Error {
public:
    using Error::Error;
};

/// Requested atom number exceeds what the lowest barrier can hold.
class UnreachableError : public Error {
public:
    using Error::Error;
};

/// Segment mean does not sit near any integer atom level.
class AmbiguousLevelError : public Error {
public:
    using Error::Error;
};

/// Channel calibration needs at least two distinct atom levels.
class InsufficientLevelsError : public Error {
public:
    using Error::Error;
};

/// Binned fit could not converge or histogram was degenerate.
class FitFailureError : public Error {
public:
    using Error::Error;
};

/// More than the tolerated fraction of Monte Carlo samples had a
/// degenerate trap (CLI exit code 3).
class DegenerateRunsError : public Error {
public:
    using Error::Error;
};

} // namespace bosestats
