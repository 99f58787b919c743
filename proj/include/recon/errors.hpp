#pragma once

#include <stdexcept>
#include <string>

namespace recon {

// Bad inputs (shape mismatches, invalid parameters). CLI exit code 2.
struct ArgumentError : std::invalid_argument {
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Missing or malformed files. CLI exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite losses and other numeric failures. CLI exit code 4.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Misuse of a stateful API (e.g. inverse conv without a recorded site set).
struct StateError : std::logic_error {
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace recon
