#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arc {

enum class ErrorCode {
    InvalidChannels,
    OutOfBounds,
    DegenerateImage,
    NoForeground,
    NoObject,
    ShapeError,
    InvalidLabel,
    NumericalError,
    ConfigError,
    BadImage,
    IoError,
    SessionClosed,
    UnknownSession,
    UnknownItem,
    UnknownLine,
    EmptyCart,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can branch without parsing
/// messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace arc
