#include "rsmt/error.hpp"

namespace rsmt {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateNet: return "DegenerateNet";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::EmptyPointSet: return "EmptyPointSet";
        case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
        case ErrorCode::DegreeTooSmall: return "DegreeTooSmall";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::CacheMismatch: return "CacheMismatch";
        case ErrorCode::TooFewNets: return "TooFewNets";
        case ErrorCode::MissingOracle: return "MissingOracle";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace rsmt
