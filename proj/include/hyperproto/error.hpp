#ifndef HYPERPROTO_ERROR_HPP
#define HYPERPROTO_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperproto {

enum class ErrorCode {
    InvalidArgument,
    InvalidDimension,
    InvalidCount,
    ZeroNorm,
    DimensionMismatch,
    TooFewPrototypes,
    ParseError,
    DomainError,
    EmptyTable,
    EmptyRowSet,
    InvalidThreshold,
    InvalidTarget,
    DuplicateClass,
    SizeMismatch,
    MissingPrototype,
    NonFiniteLoss,
    InsufficientClasses,
    InsufficientExamples,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hyperproto

#endif  // HYPERPROTO_ERROR_HPP
