#pragma once

#include <stdexcept>
#include <string>

namespace slopepath {

enum class ErrorCode {
    NonFinite,
    SingularGram,
    DimensionMismatch,
    InvalidAtZero,
    ZeroDirection,
    InvalidLevel,
    DenominatorUnderflow,
    NegativeOffset,
    InvalidDimension,
    ZeroWeights,
    InconsistentGroups,
    OddP,
    OutOfRange,
    EmptyPath,
    ParseError,
    NegativeTiming,
    StructureInvariantBroken,
    IterationCap,
    DidNotConverge,
};

/// Validation errors are caused by bad input; numerical errors by a
/// computation that lost consistency. The CLI maps them to exit codes 2 and 3.
enum class ErrorKind { Validation, Numerical };

const char* to_string(ErrorCode code) noexcept;
ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorKind kind() const noexcept { return kind_of(code_); }

private:
    ErrorCode code_;
};

} // namespace slopepath
