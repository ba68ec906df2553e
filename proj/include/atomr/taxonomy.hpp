#pragma once

#include "atomr/action.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atomr {

/// Checker error catalog, grouped by the action category it applies to.
enum class ErrorKind {
    // premise steps
    ContentConflict,
    LogicalContradiction,
    ExpressionInconsistency,
    // reasoning steps
    CalculationError,
    CommonSenseError,
    RecapitulationError,
    IgnoringOfPremises,
    MisusingOfPremises,
    ConclusionError,
    // ending steps
    ResultOmission,
    ResultsInconsistency,
    JudgmentError,
    SortingError,
};

inline constexpr std::size_t kErrorKindCount = 13;

inline constexpr std::array<ErrorKind, kErrorKindCount> kAllErrorKinds = {
    ErrorKind::ContentConflict,      ErrorKind::LogicalContradiction,
    ErrorKind::ExpressionInconsistency,
    ErrorKind::CalculationError,     ErrorKind::CommonSenseError,
    ErrorKind::RecapitulationError,  ErrorKind::IgnoringOfPremises,
    ErrorKind::MisusingOfPremises,   ErrorKind::ConclusionError,
    ErrorKind::ResultOmission,       ErrorKind::ResultsInconsistency,
    ErrorKind::JudgmentError,        ErrorKind::SortingError,
};

ActionCategory category(ErrorKind kind) noexcept;

/// Display name as used in checker prompts and tags ("Sorting Error").
std::string_view display_name(ErrorKind kind) noexcept;
/// snake_case key for traces ("sorting_error").
std::string_view key(ErrorKind kind) noexcept;
/// Lenient lookup over display names and keys; plural and singular forms
/// ("Conclusion Errors", "Expression Inconsistencies") are accepted.
std::optional<ErrorKind> try_parse_error_kind(std::string_view text);

/// What the checker looks for and how, per kind.
std::string_view definition(ErrorKind kind) noexcept;
std::string_view checking_method(ErrorKind kind) noexcept;

enum class Verdict { NoError, Error };

struct CheckReport {
    Verdict verdict = Verdict::NoError;
    std::vector<ErrorKind> kinds;
    std::string rationale;
    std::optional<std::string> suggestion;

    bool operator==(const CheckReport&) const = default;
};

}  // namespace atomr
