#pragma once

#include "atomr/action.hpp"
#include "atomr/tree.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace atomr {

enum class BacktrackReason { IncorrectContent, KeyNode, UnexploredBranch };

std::string_view to_string(BacktrackReason r) noexcept;
std::optional<BacktrackReason> try_parse_backtrack_reason(std::string_view text);

struct Extend {
    Action action = Action::PremiseDiscovery;
    std::string guidance;
    bool operator==(const Extend&) const = default;
};

struct Backtrack {
    NodeId target;
    BacktrackReason reason = BacktrackReason::UnexploredBranch;
    std::string rationale;
    bool operator==(const Backtrack&) const = default;
};

struct Terminate {
    TerminationMode mode = TerminationMode::ActiveSolved;
    bool operator==(const Terminate&) const = default;
};

using RoutingDecision = std::variant<Extend, Backtrack, Terminate>;

std::string describe(const RoutingDecision& decision);

}  // namespace atomr
