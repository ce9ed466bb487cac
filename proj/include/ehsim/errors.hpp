#pragma once

#include <stdexcept>
#include <string>

namespace ehsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (trace CSV, calibration grid, config).
struct ParseError : Error {
    using Error::Error;
};

/// Invalid configuration detected before any simulation work.
struct ConfigError : Error {
    using Error::Error;
};

/// Polynomial fit could not be computed.
struct FitError : Error {
    using Error::Error;
};

/// Fewer calibration points than the fit requires.
struct InsufficientDataError : FitError {
    using FitError::FitError;
};

/// Filesystem-level failure (unwritable sink, missing file).
struct IoError : Error {
    using Error::Error;
};

/// Internal engine contract breached (a bug, not a user error).
struct EngineError : Error {
    using Error::Error;
};

}  // namespace ehsim
