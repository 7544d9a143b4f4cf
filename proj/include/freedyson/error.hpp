#pragma once

#include <stdexcept>
#include <string>

namespace freedyson {

/// Process exit codes used by the command-line driver.
enum class ExitCode : int {
    success = 0,
    validation = 1,
    numeric = 2,
    infeasible = 3,
};

/// Base class of every error thrown by the library. Carries the exit code
/// the CLI maps it to.
class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Bad input: malformed polynomial, out-of-range letter, inconsistent config.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

/// Text could not be parsed; `position` is the 0-based byte offset.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t position)
        : ValidationError(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Divergence, blow-up, non-convergence.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}
};

/// The requested computation exceeds a configured feasibility cap.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error(ExitCode::infeasible, what) {}
};

}  // namespace freedyson
