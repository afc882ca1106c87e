#pragma once

#include <stdexcept>
#include <string>

namespace fraudkit {

enum class ErrorKind {
    invalid_argument,
    missing_file,
    missing_column,
    duplicate_column,
    non_numeric_cell,
    non_binary_label,
    missing_timestamps,
    degenerate_range,
    dimension_mismatch,
    insufficient_data,
    io_failure,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// a kind, so callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

} // namespace fraudkit
