#include "atomr/action.hpp"

#include "atomr/error.hpp"

#include <cctype>

namespace atomr {

std::string_view key(Action a) noexcept {
    switch (a) {
        case Action::PremiseDiscovery: return "premise_discovery";
        case Action::PremiseRetrieval: return "premise_retrieval";
        case Action::PremiseSummarization: return "premise_summarization";
        case Action::HypothesisGeneration: return "hypothesis_generation";
        case Action::HypothesisVerification: return "hypothesis_verification";
        case Action::SummaryFinished: return "summary_finished";
    }
    return "";
}

std::string_view footer_name(Action a) noexcept {
    switch (a) {
        case Action::PremiseDiscovery: return "PREMISE_DISCOVERY";
        case Action::PremiseRetrieval: return "PREMISE_RETRIEVAL";
        case Action::PremiseSummarization: return "PREMISE_SUMMARIZATION";
        case Action::HypothesisGeneration: return "HYPOTHESIS_GENERATION";
        case Action::HypothesisVerification: return "HYPOTHESIS_VERIFICATION";
        case Action::SummaryFinished: return "SUMMARY<FINISHED>";
    }
    return "";
}

std::string_view display_name(Action a) noexcept {
    switch (a) {
        case Action::PremiseDiscovery: return "Premise Discovery";
        case Action::PremiseRetrieval: return "Premise Retrieval";
        case Action::PremiseSummarization: return "Premise Summarization";
        case Action::HypothesisGeneration: return "Hypothesis Generation";
        case Action::HypothesisVerification: return "Hypothesis Verification";
        case Action::SummaryFinished: return "SUMMARY<FINISHED>";
    }
    return "";
}

std::string_view to_string(ActionCategory c) noexcept {
    switch (c) {
        case ActionCategory::Premise: return "premise";
        case ActionCategory::Reasoning: return "reasoning";
        case ActionCategory::Ending: return "ending";
    }
    return "";
}

namespace {

std::string squash(std::string_view text) {
    std::string out;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) out.push_back(static_cast<char>(std::toupper(u)));
    }
    return out;
}

}  // namespace

std::optional<Action> try_parse_action(std::string_view text) {
    const std::string s = squash(text);
    if (s.empty()) return std::nullopt;
    for (Action a : kAllActions) {
        if (s == squash(key(a))) return a;
    }
    // "SUMMARY", "SUMMARYFINISHED" and "SUMMARY<FINISHED>" squash alike.
    if (s == "SUMMARY") return Action::SummaryFinished;
    return std::nullopt;
}

Action parse_action(std::string_view text) {
    if (auto a = try_parse_action(text)) return *a;
    throw Error(Errc::UnknownAction, "'" + std::string(text) + "' is not an atomic reasoning action");
}

}  // namespace atomr
