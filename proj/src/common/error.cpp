#include "arc/common/error.hpp"

namespace arc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidChannels: return "InvalidChannels";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::DegenerateImage: return "DegenerateImage";
        case ErrorCode::NoForeground: return "NoForeground";
        case ErrorCode::NoObject: return "NoObject";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::InvalidLabel: return "InvalidLabel";
        case ErrorCode::NumericalError: return "NumericalError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::BadImage: return "BadImage";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SessionClosed: return "SessionClosed";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::UnknownItem: return "UnknownItem";
        case ErrorCode::UnknownLine: return "UnknownLine";
        case ErrorCode::EmptyCart: return "EmptyCart";
    }
    return "Unknown";
}

}  // namespace arc
