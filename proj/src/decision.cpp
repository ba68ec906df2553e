#include "atomr/decision.hpp"

#include <cctype>

namespace atomr {

std::string_view to_string(BacktrackReason r) noexcept {
    switch (r) {
        case BacktrackReason::IncorrectContent: return "IncorrectContent";
        case BacktrackReason::KeyNode: return "KeyNode";
        case BacktrackReason::UnexploredBranch: return "UnexploredBranch";
    }
    return "";
}

std::optional<BacktrackReason> try_parse_backtrack_reason(std::string_view text) {
    std::string squashed;
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            squashed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (squashed.rfind("incorrectcontent", 0) == 0) return BacktrackReason::IncorrectContent;
    if (squashed.rfind("keynode", 0) == 0) return BacktrackReason::KeyNode;
    if (squashed.rfind("unexploredbranch", 0) == 0) return BacktrackReason::UnexploredBranch;
    return std::nullopt;
}

std::string describe(const RoutingDecision& decision) {
    if (const auto* e = std::get_if<Extend>(&decision)) return "extend " + std::string(key(e->action));
    if (const auto* b = std::get_if<Backtrack>(&decision)) {
        return "backtrack to node " + std::to_string(b->target.value) + " (" + std::string(to_string(b->reason)) + ")";
    }
    return "terminate " + std::string(to_string(std::get<Terminate>(decision).mode));
}

}  // namespace atomr
