#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace atomr {

/// The closed set of atomic reasoning actions a node can execute.
enum class Action {
    PremiseDiscovery,
    PremiseRetrieval,
    PremiseSummarization,
    HypothesisGeneration,
    HypothesisVerification,
    SummaryFinished,
};

enum class ActionCategory { Premise, Reasoning, Ending };

inline constexpr std::size_t kActionCount = 6;

inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::PremiseDiscovery,       Action::PremiseRetrieval,
    Action::PremiseSummarization,   Action::HypothesisGeneration,
    Action::HypothesisVerification, Action::SummaryFinished,
};

constexpr ActionCategory category(Action a) noexcept {
    switch (a) {
        case Action::PremiseDiscovery:
        case Action::PremiseRetrieval:
        case Action::PremiseSummarization:
            return ActionCategory::Premise;
        case Action::HypothesisGeneration:
        case Action::HypothesisVerification:
            return ActionCategory::Reasoning;
        case Action::SummaryFinished:
            return ActionCategory::Ending;
    }
    return ActionCategory::Ending;
}

constexpr std::size_t index_of(Action a) noexcept { return static_cast<std::size_t>(a); }

/// Stable snake_case identifier, used in files and traces ("hypothesis_generation").
std::string_view key(Action a) noexcept;

/// Routing-footer spelling ("HYPOTHESIS_GENERATION", "SUMMARY<FINISHED>").
std::string_view footer_name(Action a) noexcept;

/// Human label used in renderings ("Hypothesis Generation", "SUMMARY<FINISHED>").
std::string_view display_name(Action a) noexcept;

std::string_view to_string(ActionCategory c) noexcept;

/// Lenient lookup: case, spaces, underscores, hyphens and angle brackets are
/// ignored, so "Premise Discovery", "premise_discovery" and "SUMMARY<FINISHED>"
/// all resolve. Returns nullopt for anything outside the six actions.
std::optional<Action> try_parse_action(std::string_view text);

/// Same as try_parse_action but throws Error(UnknownAction).
Action parse_action(std::string_view text);

}  // namespace atomr
