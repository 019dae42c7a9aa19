#pragma once

#include <stdexcept>
#include <string>

namespace eoread {

/// A caller-supplied argument violates an operation's precondition
/// (non-physical parameter, step size too coarse, empty grid, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A formula was evaluated at a singular point (e.g. degenerate detuning).
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Linear solve, eigenvalue or fit failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matched filter built from indistinguishable mean traces.
class DegenerateFilterError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Calibration data did not follow the expected linear / Gaussian laws.
class FitQualityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Malformed or incomplete configuration file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw PreconditionError(message);
    }
}
} // namespace detail

} // namespace eoread
