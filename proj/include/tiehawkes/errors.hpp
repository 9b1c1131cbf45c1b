#pragma once

#include <stdexcept>
#include <string>

namespace tiehawkes {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    infeasible = 1,
    io = 2,
    config = 3,
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept { return ExitCode::infeasible; }
};

// Unknown user or word.
struct LookupError : Error {
    using Error::Error;
};

// Precondition violated by the caller.
struct ArgumentError : Error {
    using Error::Error;
};

// A statistic is undefined for the given data (empty pool, no qualifying edges).
struct InsufficientData : Error {
    using Error::Error;
};

// Analysis cannot proceed (non-finite likelihood, unstable simulation).
struct InfeasibleError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

// Malformed input line; the message carries the file and line number.
struct ParseError : IoError {
    using IoError::IoError;
};

struct ConfigError : Error {
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

} // namespace tiehawkes
