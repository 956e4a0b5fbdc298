#pragma once

#include <stdexcept>
#include <string>

namespace shelab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadDomain : Error {
    using Error::Error;
};

struct CflViolation : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct OutOfDomain : Error {
    using Error::Error;
};

struct NegativeInput : Error {
    using Error::Error;
};

struct BadTime : Error {
    using Error::Error;
};

struct BadRange : Error {
    using Error::Error;
};

/// Thrown when a Monte Carlo mean underflows to zero and no finite
/// log-estimate exists.
struct DegenerateEstimate : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace shelab
