#include <slopepath/error.hpp>

namespace slopepath {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidAtZero: return "InvalidAtZero";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::DenominatorUnderflow: return "DenominatorUnderflow";
    case ErrorCode::NegativeOffset: return "NegativeOffset";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::ZeroWeights: return "ZeroWeights";
    case ErrorCode::InconsistentGroups: return "InconsistentGroups";
    case ErrorCode::OddP: return "OddP";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NegativeTiming: return "NegativeTiming";
    case ErrorCode::StructureInvariantBroken: return "StructureInvariantBroken";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    }
    return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NegativeTiming:
    case ErrorCode::StructureInvariantBroken:
    case ErrorCode::IterationCap:
    case ErrorCode::DidNotConverge:
        return ErrorKind::Numerical;
    default:
        return ErrorKind::Validation;
    }
}

} // namespace slopepath
