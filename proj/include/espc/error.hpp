#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace espc {

enum class ErrorCode {
    EmptyInput,
    NonFiniteKey,
    StartOutOfRange,
    InvalidK,
    OutOfRange,
    IndexMismatch,
    InvalidPolicyParams,
    SupportViolation,
    InvalidWidth,
    InsufficientData,
    InvalidParams,
    IoError,
    TruncatedFile,
    CountMismatch,
    BadFormat,
    DegenerateRange,
    InvalidM,
    InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFiniteKey: return "NonFiniteKey";
    case ErrorCode::StartOutOfRange: return "StartOutOfRange";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::InvalidPolicyParams: return "InvalidPolicyParams";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::InvalidWidth: return "InvalidWidth";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::InvalidM: return "InvalidM";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for failures caused by the filesystem or a malformed file.
    bool is_io() const noexcept {
        return code_ == ErrorCode::IoError || code_ == ErrorCode::TruncatedFile ||
               code_ == ErrorCode::CountMismatch || code_ == ErrorCode::BadFormat;
    }

private:
    ErrorCode code_;
};

} // namespace espc
