#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slowvary {

/// Failure categories raised by the library. The CLI maps these onto exit
/// codes, so keep `is_assumption_violation` in sync when adding kinds.
enum class ErrorKind {
    InvalidArgument,
    Overflow,
    MissingBaseOperator,
    NoCentreMode,
    UnstableMode,
    GapViolation,
    DefectiveNormalisation,
    ExactModeUnsupported,
    SylvesterInconsistent,
    NonPositiveDiffusivity,
    GridTooCoarse,
    StabilityViolation,
    InsufficientDecay,
    Parse,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::MissingBaseOperator: return "MissingBaseOperator";
    case ErrorKind::NoCentreMode: return "NoCentreMode";
    case ErrorKind::UnstableMode: return "UnstableMode";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::DefectiveNormalisation: return "DefectiveNormalisation";
    case ErrorKind::ExactModeUnsupported: return "ExactModeUnsupported";
    case ErrorKind::SylvesterInconsistent: return "SylvesterInconsistent";
    case ErrorKind::NonPositiveDiffusivity: return "NonPositiveDiffusivity";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::InsufficientDecay: return "InsufficientDecay";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// True for errors that mean the input violates the spectral assumptions
/// (centre/stable split, gap, base operator present) rather than a numerical
/// failure further down the pipeline.
constexpr bool is_assumption_violation(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::MissingBaseOperator:
    case ErrorKind::NoCentreMode:
    case ErrorKind::UnstableMode:
    case ErrorKind::GapViolation:
    case ErrorKind::DefectiveNormalisation:
    case ErrorKind::NonPositiveDiffusivity:
    case ErrorKind::GridTooCoarse:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace slowvary
