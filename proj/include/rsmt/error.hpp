#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsmt {

enum class ErrorCode {
    DegenerateNet,
    EmptyBatch,
    EmptyPointSet,
    DegreeTooLarge,
    DegreeTooSmall,
    ShapeError,
    CacheMismatch,
    TooFewNets,
    MissingOracle,
    InvalidConfig,
    ParseError,
    UnsupportedVersion,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every recoverable failure in the library; the
// code lets callers (and tests) distinguish failure classes without RTTI.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rsmt
