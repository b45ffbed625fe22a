#include "stereodiff/error.hpp"

namespace stereodiff {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValues: return "NonFiniteValues";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::MissingIndex: return "MissingIndex";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidMask: return "InvalidMask";
    case ErrorCode::FileAccess: return "FileAccess";
    case ErrorCode::FlowDimensionMismatch: return "FlowDimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnnormalizedDepth: return "UnnormalizedDepth";
    case ErrorCode::BaselineOutOfRange: return "BaselineOutOfRange";
    case ErrorCode::InvalidViewCount: return "InvalidViewCount";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::RemoteError: return "RemoteError";
    case ErrorCode::ConnectionFailed: return "ConnectionFailed";
    }
    return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedFile:
    case ErrorCode::NonFiniteValues:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::NonPositiveDepth:
    case ErrorCode::MissingIndex:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidMask:
    case ErrorCode::FileAccess:
        return ErrorKind::Io;
    case ErrorCode::ProtocolViolation:
    case ErrorCode::RemoteError:
    case ErrorCode::ConnectionFailed:
        return ErrorKind::Protocol;
    default:
        return ErrorKind::Invariant;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

}  // namespace stereodiff
