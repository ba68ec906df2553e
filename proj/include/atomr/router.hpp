#pragma once

#include "atomr/backend.hpp"
#include "atomr/checker.hpp"
#include "atomr/decision.hpp"
#include "atomr/executor.hpp"
#include "atomr/prompts.hpp"
#include "atomr/sop.hpp"
#include "atomr/tree.hpp"

#include <functional>
#include <optional>
#include <string>

namespace atomr {

struct RouterConfig {
    int max_rounds = 12;
    bool force_verify_on_first_finish = true;
    int max_chains = 4;
    /// After the first chain ends in a summary, explore one more branch
    /// before terminating. When false an accepted summary ends the session.
    bool backtrack_after_summary = true;
    double temperature = 0.2;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;
    std::size_t tree_budget = 24000;

    /// Throws Error(PreconditionFailed) when max_rounds < 2 or max_chains < 1.
    void validate() const;
};

/// Parsed routing footer ("ACTION: ...", "GUIDANCE: ...").
struct RouterProposal {
    bool backtrack = false;
    Action action = Action::PremiseDiscovery;
    std::string guidance;
};

std::optional<RouterProposal> parse_routing_reply(std::string_view text);

/// Parsed backtrack footer. `step` is one-based on the active path; `node`
/// is set when the reply names a node id instead ("TARGET: node 7").
struct BacktrackFooter {
    std::optional<std::size_t> step;
    std::optional<NodeId> node;
    std::optional<BacktrackReason> reason;
    std::string rationale;
};

std::optional<BacktrackFooter> parse_backtrack_reply(std::string_view text);

/// True when a verification node follows the last generation node on the
/// active path.
bool latest_hypothesis_verified(const AtomicTree& tree);

/// True when a chain other than the active one ends in a summary node.
bool has_completed_chain(const AtomicTree& tree);

/// Next step under the hard rules: round cap, verify right after a
/// hypothesis, verify before the first finish, then the backend's proposal
/// (one re-ask, then a premise-summarization fallback).
RoutingDecision decide(AtomicTree& tree, const RouterConfig& config, Backend& backend, const Sop* sop = nullptr,
                       const PromptCatalog& catalog = PromptCatalog::defaults());

/// Asks the backend where to branch from. Invalid or off-path answers get one
/// re-ask, then fall back to the deepest hypothesis-generation node (else
/// the last node). Throws Error(NoBacktrackCandidate) on an empty path.
Backtrack select_backtrack_target(AtomicTree& tree, Backend& backend, const RouterConfig& config = {},
                                  const PromptCatalog& catalog = PromptCatalog::defaults());

/// Summarizes a finished chain and stores the text as its summary.
void compress_chain(AtomicTree& tree, ChainId chain, Backend& backend, const ExecutorConfig& config = {},
                    const PromptCatalog& catalog = PromptCatalog::defaults());

struct SessionConfig {
    RouterConfig router;
    CheckerConfig checker;
    ExecutorConfig executor;
    /// Let triage consult the routing backend when keywords are inconclusive.
    bool triage_with_backend = true;
};

/// Backends per role. Any may point at the same object.
struct SessionBackends {
    Backend* routing = nullptr;
    Backend* solver = nullptr;
    Backend* checker = nullptr;
    Backend* summarizer = nullptr;

    static SessionBackends all(Backend& backend) { return {&backend, &backend, &backend, &backend}; }
};

struct SessionHooks {
    std::function<void(const AtomicTree&, const RoutingDecision&)> on_decision;
    std::function<void(const AtomicTree&, NodeId)> on_node;
};

struct SessionResult {
    AtomicTree tree;
    FinalAnswer answer;
    std::string domain;
    /// Set when a backend failure aborted the session; the tree is the
    /// partial trace and is not terminated.
    std::optional<std::string> failure;
};

SessionResult run_session(const Problem& problem, const SessionConfig& config, const SessionBackends& backends,
                          const SopRegistry& sops, const SessionHooks& hooks = {},
                          const PromptCatalog& catalog = PromptCatalog::defaults());

}  // namespace atomr
