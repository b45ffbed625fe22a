#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stereodiff {

enum class ErrorCode {
    // imaging-core
    BadMagic,
    TruncatedFile,
    NonFiniteValues,
    UnsupportedFormat,
    NonPositiveDepth,
    MissingIndex,
    DimensionMismatch,
    InvalidMask,
    FileAccess,
    // depth-prep
    FlowDimensionMismatch,
    InvalidArgument,
    // warp-mpi
    UnnormalizedDepth,
    BaselineOutOfRange,
    // frame-matrix
    InvalidViewCount,
    // diffusion-core
    InvalidRange,
    ShapeMismatch,
    SequenceTooLong,
    // protocol
    ProtocolViolation,
    RemoteError,
    ConnectionFailed,
};

/// Failure class, used to pick a process exit status.
enum class ErrorKind { Invariant, Io, Protocol };

std::string_view to_string(ErrorCode code) noexcept;
ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    ErrorKind kind() const noexcept { return kind_of(code_); }

private:
    ErrorCode code_;
};

}  // namespace stereodiff
