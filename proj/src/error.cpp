#include "hyperproto/error.hpp"

namespace hyperproto {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidDimension: return "InvalidDimension";
        case ErrorCode::InvalidCount: return "InvalidCount";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewPrototypes: return "TooFewPrototypes";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::EmptyTable: return "EmptyTable";
        case ErrorCode::EmptyRowSet: return "EmptyRowSet";
        case ErrorCode::InvalidThreshold: return "InvalidThreshold";
        case ErrorCode::InvalidTarget: return "InvalidTarget";
        case ErrorCode::DuplicateClass: return "DuplicateClass";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::MissingPrototype: return "MissingPrototype";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::InsufficientClasses: return "InsufficientClasses";
        case ErrorCode::InsufficientExamples: return "InsufficientExamples";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace hyperproto
