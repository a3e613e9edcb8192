#pragma once

#include <stdexcept>
#include <string>

namespace seedvos {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    FileNotFound,
    Io,
    MalformedHeader,
    NonFloatPayload,
    ShapeMismatch,
    InvalidValue,
    EmptyInput,
    Pipeline,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library. The code distinguishes input
/// problems (bad files, bad shapes) from failures inside the pipeline.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for errors caused by the caller's inputs rather than the pipeline.
    bool is_input_error() const noexcept { return code_ != ErrorCode::Pipeline && code_ != ErrorCode::EmptyInput; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace seedvos
