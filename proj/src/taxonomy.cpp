#include "atomr/taxonomy.hpp"

#include <cctype>
#include <string>

namespace atomr {

ActionCategory category(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ContentConflict:
        case ErrorKind::LogicalContradiction:
        case ErrorKind::ExpressionInconsistency:
            return ActionCategory::Premise;
        case ErrorKind::CalculationError:
        case ErrorKind::CommonSenseError:
        case ErrorKind::RecapitulationError:
        case ErrorKind::IgnoringOfPremises:
        case ErrorKind::MisusingOfPremises:
        case ErrorKind::ConclusionError:
            return ActionCategory::Reasoning;
        case ErrorKind::ResultOmission:
        case ErrorKind::ResultsInconsistency:
        case ErrorKind::JudgmentError:
        case ErrorKind::SortingError:
            return ActionCategory::Ending;
    }
    return ActionCategory::Ending;
}

std::string_view display_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ContentConflict: return "Content Conflict";
        case ErrorKind::LogicalContradiction: return "Logical Contradiction";
        case ErrorKind::ExpressionInconsistency: return "Expression Inconsistency";
        case ErrorKind::CalculationError: return "Calculation Error";
        case ErrorKind::CommonSenseError: return "Common Sense Error";
        case ErrorKind::RecapitulationError: return "Recapitulation Error";
        case ErrorKind::IgnoringOfPremises: return "Ignoring of Premises";
        case ErrorKind::MisusingOfPremises: return "Misusing of Premises";
        case ErrorKind::ConclusionError: return "Conclusion Error";
        case ErrorKind::ResultOmission: return "Result Omission";
        case ErrorKind::ResultsInconsistency: return "Results Inconsistency";
        case ErrorKind::JudgmentError: return "Judgment Error";
        case ErrorKind::SortingError: return "Sorting Error";
    }
    return "";
}

std::string_view key(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ContentConflict: return "content_conflict";
        case ErrorKind::LogicalContradiction: return "logical_contradiction";
        case ErrorKind::ExpressionInconsistency: return "expression_inconsistency";
        case ErrorKind::CalculationError: return "calculation_error";
        case ErrorKind::CommonSenseError: return "common_sense_error";
        case ErrorKind::RecapitulationError: return "recapitulation_error";
        case ErrorKind::IgnoringOfPremises: return "ignoring_of_premises";
        case ErrorKind::MisusingOfPremises: return "misusing_of_premises";
        case ErrorKind::ConclusionError: return "conclusion_error";
        case ErrorKind::ResultOmission: return "result_omission";
        case ErrorKind::ResultsInconsistency: return "results_inconsistency";
        case ErrorKind::JudgmentError: return "judgment_error";
        case ErrorKind::SortingError: return "sorting_error";
    }
    return "";
}

namespace {

// Lowercase letters only; a trailing plural "s"/"es"/"ies" is folded so
// "Conclusion Errors" and "Expression Inconsistencies" match their kinds.
std::string fold(std::string_view text) {
    std::string out;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) out.push_back(static_cast<char>(std::tolower(u)));
    }
    auto ends_with = [&](std::string_view suffix) {
        return out.size() > suffix.size() &&
               out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with("ies")) {
        out.resize(out.size() - 3);
        out += "y";
    } else if (ends_with("errors")) {
        out.pop_back();
    }
    return out;
}

}  // namespace

std::optional<ErrorKind> try_parse_error_kind(std::string_view text) {
    const std::string f = fold(text);
    if (f.empty()) return std::nullopt;
    for (ErrorKind k : kAllErrorKinds) {
        if (f == fold(display_name(k)) || f == fold(key(k))) return k;
    }
    return std::nullopt;
}

std::string_view definition(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ContentConflict:
            return "An extracted premise disagrees with what the problem statement actually says.";
        case ErrorKind::LogicalContradiction:
            return "A step is inconsistent with, or does not follow from, the steps before it.";
        case ErrorKind::ExpressionInconsistency:
            return "An expression, symbol, unit or value changes form or meaning between steps.";
        case ErrorKind::CalculationError:
            return "An arithmetic or functional slip, or a value copied wrongly between steps.";
        case ErrorKind::CommonSenseError:
            return "A claim that breaks basic common knowledge, such as a wrong numeric comparison.";
        case ErrorKind::RecapitulationError:
            return "The same idea is restated redundantly instead of advancing the reasoning.";
        case ErrorKind::IgnoringOfPremises:
            return "A constraint or case from the premises is left out of consideration.";
        case ErrorKind::MisusingOfPremises:
            return "A premise is altered, confused with another, or applied to the wrong referent.";
        case ErrorKind::ConclusionError:
            return "A conclusion is not supported by the preceding steps or conflicts with a premise.";
        case ErrorKind::ResultOmission:
            return "The final step leaves out a result the question asks for.";
        case ErrorKind::ResultsInconsistency:
            return "The result is stated differently in different places.";
        case ErrorKind::JudgmentError:
            return "The final judgment abruptly departs from what the reasoning established.";
        case ErrorKind::SortingError:
            return "The final ordering or position read-out disagrees with the ordering derived earlier.";
    }
    return "";
}

std::string_view checking_method(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ContentConflict:
            return "Compare every stated premise against the original problem text, line by line.";
        case ErrorKind::LogicalContradiction:
            return "Walk the steps in order; test each conditional branch separately for gaps.";
        case ErrorKind::ExpressionInconsistency:
            return "Diff expressions between adjacent steps; re-check substitutions and units.";
        case ErrorKind::CalculationError:
            return "Recompute each calculation and confirm intermediate values carry over.";
        case ErrorKind::CommonSenseError:
            return "Test conclusions against basic facts and numeric sanity.";
        case ErrorKind::RecapitulationError:
            return "Look for repeated statements that add no new information.";
        case ErrorKind::IgnoringOfPremises:
            return "List every constraint from the premises and confirm each one was applied.";
        case ErrorKind::MisusingOfPremises:
            return "Compare each statement directly against the premise it relies on.";
        case ErrorKind::ConclusionError:
            return "Map each conclusion back to the evidence and premises supporting it.";
        case ErrorKind::ResultOmission:
            return "Confirm every requested result is explicitly stated.";
        case ErrorKind::ResultsInconsistency:
            return "Compare the result wherever it appears in the process.";
        case ErrorKind::JudgmentError:
            return "Check that the final judgment follows from the preceding conclusions.";
        case ErrorKind::SortingError:
            return "Re-sort the sequence explicitly, define positional terms, and read the item off the re-sorted list.";
    }
    return "";
}

}  // namespace atomr
