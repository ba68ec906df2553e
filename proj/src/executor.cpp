#include "atomr/executor.hpp"

#include "atomr/error.hpp"

#include <regex>
#include <sstream>

namespace atomr {

CompletionRequest PromptBundle::to_request(std::string_view tag) const {
    CompletionRequest r;
    r.messages = messages;
    r.temperature = temperature;
    r.max_tokens = max_tokens;
    r.seed = seed;
    r.tag = std::string(tag);
    return r;
}

std::string_view default_guidance(Action action) {
    switch (action) {
        case Action::PremiseDiscovery:
            return "Identify every condition and constraint stated in the problem, list the clues one by one, and note implicit rules.";
        case Action::PremiseRetrieval:
            return "Restate precisely the clues, conditions and intermediate results that bear on the current sub-problem.";
        case Action::PremiseSummarization:
            return "Summarize what is established so far, what is still open, and which clues remain unused.";
        case Action::HypothesisGeneration:
            return "Pick the most constrained open sub-problem and propose candidate hypotheses for it, each marked as an assumption.";
        case Action::HypothesisVerification:
            return "Check each pending hypothesis against every relevant premise and clue; reject the ones that fail and say which survive.";
        case Action::SummaryFinished:
            return "State the final result of the verified reasoning in the required answer format.";
    }
    return "";
}

CompletionResult charged_call(AtomicTree& tree, Backend& backend, const CompletionRequest& request) {
    CompletionResult r = backend.complete(request);
    tree.add_usage(r.usage.prompt_tokens, r.usage.completion_tokens, r.latency_ms);
    return r;
}

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

CompletionResult charged_call_nonblank(AtomicTree& tree, Backend& backend, const CompletionRequest& request) {
    CompletionResult r = charged_call(tree, backend, request);
    if (!blank(r.text)) return r;
    tree.add_event("empty_completion_retry", request.tag);
    r = charged_call(tree, backend, request);
    if (blank(r.text)) throw Error(Errc::EmptyCompletion, "blank completion twice for tag '" + request.tag + "'");
    return r;
}

bool has_hypothesis_marker(std::string_view content) {
    static const std::regex marker(R"(^[\s\-*>#]*Hypothesis\s+\d+\s*\**\s*:)", std::regex::icase);
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        if (std::regex_search(line, marker)) return true;
    }
    return false;
}

std::string answer_format_instruction(const AnswerSchema& schema) {
    return std::visit(
        [](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, MultipleChoiceSchema>) {
                const char last = option_letter(s.options.size() - 1);
                return std::string("End with the sentence \"The correct answer is (X)\" where X is one of the option letters A-") +
                       last + ".";
            } else if constexpr (std::is_same_v<S, GridSchema>) {
                std::string order;
                for (const auto& a : s.attributes) order += (order.empty() ? "" : ", ") + a.name;
                return "End with a line \"Solution:\" followed by one line per house in the form \"House k: value, value, ...\", "
                       "giving the values in this order: " + order + ".";
            } else if constexpr (std::is_same_v<S, NumericSchema>) {
                return "End with a line of the form \"Answer: <number>\".";
            } else {
                return "End with a line of the form \"Answer: <answer>\".";
            }
        },
        schema);
}

std::string sop_block(const Sop* sop, Action action) {
    if (sop == nullptr) return {};
    const std::string& strategy = sop_guidance(*sop, action);
    if (strategy.empty()) return {};
    std::string out = strategy;
    for (const auto& ex : sop->examples) {
        out += "\n\nExample problem: " + ex.problem_excerpt + "\nExample step: " + ex.worked_step;
    }
    return out;
}

PromptBundle build_expansion_prompt(const AtomicTree& tree, const Extend& decision, std::string_view sop_guidance,
                                    const ExecutorConfig& config, const PromptCatalog& catalog) {
    PromptBundle b;
    b.temperature = config.solve_temperature;
    b.max_tokens = config.max_tokens;
    b.seed = config.seed;
    const std::string sop = sop_guidance.empty()
                                ? std::string()
                                : "\n# Strategy for this action:\n\n" + std::string(sop_guidance) + "\n";
    b.messages.push_back({Role::System, catalog.get("solver_system").render({})});
    b.messages.push_back({Role::User, catalog.get("solver_user").render({
                                          {"problem", tree.problem().statement},
                                          {"tree", render_tree(tree, config.tree_budget)},
                                          {"action", std::string(display_name(decision.action))},
                                          {"guidance", decision.guidance},
                                          {"sop", sop},
                                      })});
    return b;
}

NodeId execute(AtomicTree& tree, const Extend& decision, Backend& backend, const Sop* sop,
               const ExecutorConfig& config, const PromptCatalog& catalog) {
    if (tree.terminated()) throw Error(Errc::Terminated, "cannot execute on a terminated tree");
    if (decision.action == Action::HypothesisVerification && !tree.has_on_active_path(Action::HypothesisGeneration)) {
        throw Error(Errc::MissingHypothesis, "no hypothesis on the active path to verify");
    }
    const PromptBundle bundle = build_expansion_prompt(tree, decision, sop_block(sop, decision.action), config, catalog);
    const CompletionResult r = charged_call_nonblank(tree, backend, bundle.to_request(tags::kSolve));
    const NodeId id = tree.append_node(decision.action, decision.guidance, trim(r.text));
    if (decision.action == Action::HypothesisGeneration && !has_hypothesis_marker(tree.node(id).content)) {
        tree.flag(id);
        tree.add_event("unmarked_hypothesis", "node " + std::to_string(id.value));
    }
    return id;
}

FinalAnswer finalize(AtomicTree& tree, TerminationMode mode, Backend& backend, const ExecutorConfig& config,
                     const PromptCatalog& catalog) {
    const std::string note = mode == TerminationMode::PassiveLimit
                                 ? "The reasoning budget ran out before the process was finished. Give your best "
                                   "answer from the work so far.\n"
                                 : "";
    CompletionRequest req;
    req.tag = std::string(tags::kSummarize);
    req.temperature = config.summarize_temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages.push_back({Role::System, catalog.get("solver_system").render({})});
    req.messages.push_back({Role::User, catalog.get("finalize_user").render({
                                            {"problem", tree.problem().statement},
                                            {"tree", render_tree(tree, config.tree_budget)},
                                            {"mode_note", note},
                                            {"answer_format", answer_format_instruction(tree.problem().schema)},
                                        })});
    const CompletionResult r = charged_call_nonblank(tree, backend, req);
    FinalAnswer out;
    out.text = trim(r.text);
    out.extracted = extract_answer(out.text, tree.problem().schema);
    return out;
}

}  // namespace atomr
