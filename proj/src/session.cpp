#include "atomr/error.hpp"
#include "atomr/router.hpp"

namespace atomr {

SessionResult run_session(const Problem& problem, const SessionConfig& config, const SessionBackends& backends,
                          const SopRegistry& sops, const SessionHooks& hooks, const PromptCatalog& catalog) {
    if (!backends.routing || !backends.solver || !backends.checker || !backends.summarizer) {
        throw Error(Errc::PreconditionFailed, "every session backend must be set");
    }
    config.router.validate();
    AtomicTree tree(problem);
    FinalAnswer answer;
    std::string domain = std::string(kDefaultDomain);
    std::optional<std::string> failure;

    try {
        const TriageOutcome triaged =
            triage_problem(problem, sops, config.triage_with_backend ? backends.routing : nullptr);
        domain = triaged.domain;
        if (triaged.call) {
            tree.add_usage(triaged.call->usage.prompt_tokens, triaged.call->usage.completion_tokens,
                           triaged.call->latency_ms);
        }
        tree.add_event("triage", domain);
        const Sop* sop = &sops.get(domain);

        while (true) {
            const RoutingDecision decision = decide(tree, config.router, *backends.routing, sop, catalog);
            if (hooks.on_decision) hooks.on_decision(tree, decision);

            if (const auto* extend = std::get_if<Extend>(&decision)) {
                const NodeId id = execute(tree, *extend, *backends.solver, sop, config.executor, catalog);
                review_node(tree, id, *backends.checker, *backends.solver, config.checker, catalog);
                if (hooks.on_node) hooks.on_node(tree, id);
            } else if (const auto* back = std::get_if<Backtrack>(&decision)) {
                const ChainId left = tree.active_chain_id();
                tree.branch_at(back->target, ChainStatus::Suspended);
                tree.add_event("backtrack", "node " + std::to_string(back->target.value) + " " +
                                                std::string(to_string(back->reason)));
                compress_chain(tree, left, *backends.summarizer, config.executor, catalog);
            } else {
                const TerminationMode mode = std::get<Terminate>(decision).mode;
                answer = finalize(tree, mode, *backends.summarizer, config.executor, catalog);
                tree.set_termination(mode, answer.text);
                break;
            }
        }
    } catch (const BackendError& e) {
        failure = e.what();
    } catch (const Error& e) {
        if (e.code() != Errc::EmptyCompletion) throw;
        failure = e.what();
    }
    if (failure && !tree.terminated()) tree.add_event("session_aborted", *failure);
    return SessionResult{std::move(tree), std::move(answer), std::move(domain), std::move(failure)};
}

}  // namespace atomr
