#pragma once

#include "atomr/backend.hpp"
#include "atomr/prompts.hpp"
#include "atomr/taxonomy.hpp"
#include "atomr/tree.hpp"

#include <optional>
#include <string>
#include <vector>

namespace atomr {

enum class CheckerMode { Every, ReasoningOnly, EndingOnly, Off };

std::string_view to_string(CheckerMode m) noexcept;
std::optional<CheckerMode> try_parse_checker_mode(std::string_view text);

struct CheckerConfig {
    CheckerMode mode = CheckerMode::Every;
    int max_revisions = 2;
    double temperature = 0.0;
    double revise_temperature = 0.7;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;
    std::size_t tree_budget = 24000;
};

/// The error kinds of the action's category, in catalog order.
std::vector<ErrorKind> applicable_errors(Action action);

bool should_check(CheckerMode mode, Action action) noexcept;

/// Kind used when a reply reports an error without naming one.
ErrorKind default_error_kind(ActionCategory category) noexcept;

/// Reads the last "Check Result:" line. Kinds come from the last
/// "Error Types:" line and from bracketed tags such as "[Sorting Error]".
/// Returns nullopt when no verdict line is found.
std::optional<CheckReport> parse_check_report(std::string_view text, ActionCategory category);

/// The checker prompt for a node: only its category's error definitions.
std::vector<Message> build_check_messages(const AtomicTree& tree, NodeId node, const CheckerConfig& config = {},
                                          const PromptCatalog& catalog = PromptCatalog::defaults());

/// One checker call (plus one re-ask when the reply has no verdict). The
/// report is recorded on the node. An unparseable reply fails open to
/// NoError with rationale "unparseable" and a trace event.
CheckReport check(AtomicTree& tree, NodeId node, Backend& backend, const CheckerConfig& config = {},
                  const PromptCatalog& catalog = PromptCatalog::defaults());

/// Rewrites the node from the report. Throws Error(PreconditionFailed) when
/// the report is NoError or the node already used max_revisions.
void revise(AtomicTree& tree, NodeId node, const CheckReport& report, Backend& backend,
            const CheckerConfig& config = {}, const PromptCatalog& catalog = PromptCatalog::defaults());

struct ReviewOutcome {
    int checks = 0;
    int revisions = 0;
    bool flagged = false;
};

/// check -> revise -> re-check until NoError or the revision cap; at the cap
/// a still-failing node is accepted and flagged. Skipped per config.mode.
ReviewOutcome review_node(AtomicTree& tree, NodeId node, Backend& checker, Backend& reviser,
                          const CheckerConfig& config = {}, const PromptCatalog& catalog = PromptCatalog::defaults());

}  // namespace atomr
