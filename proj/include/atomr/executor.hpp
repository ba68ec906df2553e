#pragma once

#include "atomr/answers.hpp"
#include "atomr/backend.hpp"
#include "atomr/decision.hpp"
#include "atomr/prompts.hpp"
#include "atomr/render.hpp"
#include "atomr/sop.hpp"
#include "atomr/tree.hpp"

#include <optional>
#include <string>

namespace atomr {

struct ExecutorConfig {
    double solve_temperature = 0.7;
    double summarize_temperature = 0.2;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;
    /// Byte budget for the rendered tree inside prompts.
    std::size_t tree_budget = 24000;
};

struct PromptBundle {
    std::vector<Message> messages;
    double temperature = 0.7;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;

    CompletionRequest to_request(std::string_view tag) const;
};

struct FinalAnswer {
    std::string text;
    std::optional<Answer> extracted;
};

/// Built-in guidance for an action when the router gives none.
std::string_view default_guidance(Action action);

/// Calls the backend and charges usage to the tree.
CompletionResult charged_call(AtomicTree& tree, Backend& backend, const CompletionRequest& request);

/// As charged_call, retrying once when the completion is blank; a second
/// blank completion throws Error(EmptyCompletion).
CompletionResult charged_call_nonblank(AtomicTree& tree, Backend& backend, const CompletionRequest& request);

/// True when some line of `content` opens with "Hypothesis <k>:" (list
/// bullets and bold markers allowed).
bool has_hypothesis_marker(std::string_view content);

/// Answer-format instruction for a schema.
std::string answer_format_instruction(const AnswerSchema& schema);

/// System: solver instructions. User: problem, rendered tree, action, router
/// guidance, then the SOP block when `sop_guidance` is non-empty.
PromptBundle build_expansion_prompt(const AtomicTree& tree, const Extend& decision, std::string_view sop_guidance,
                                    const ExecutorConfig& config = {},
                                    const PromptCatalog& catalog = PromptCatalog::defaults());

/// SOP text handed to the solver for `action`: the strategy plus any examples.
std::string sop_block(const Sop* sop, Action action);

/// Runs one action and appends exactly one node. An unmarked hypothesis
/// step is flagged and logged.
NodeId execute(AtomicTree& tree, const Extend& decision, Backend& backend, const Sop* sop = nullptr,
               const ExecutorConfig& config = {}, const PromptCatalog& catalog = PromptCatalog::defaults());

/// One summarize call turning the tree into an answer in the schema's format.
FinalAnswer finalize(AtomicTree& tree, TerminationMode mode, Backend& backend, const ExecutorConfig& config = {},
                     const PromptCatalog& catalog = PromptCatalog::defaults());

}  // namespace atomr
