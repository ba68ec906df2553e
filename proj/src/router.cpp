#include "atomr/router.hpp"

#include "atomr/error.hpp"
#include "atomr/render.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace atomr {

void RouterConfig::validate() const {
    if (max_rounds < 2) throw Error(Errc::PreconditionFailed, "max_rounds must be at least 2");
    if (max_chains < 1) throw Error(Errc::PreconditionFailed, "max_chains must be at least 1");
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Drops bold markers and leading bullets so "**ACTION:** X" reads as "ACTION: X".
std::string undecorate(std::string_view line) {
    std::string out;
    for (char c : line) {
        if (c != '*') out.push_back(c);
    }
    out = trim(out);
    while (!out.empty() && (out.front() == '-' || out.front() == '>' || out.front() == '#')) out = trim(out.substr(1));
    return out;
}

// Index of the last line labelled `label:` (case-insensitive) and its value.
std::optional<std::pair<std::size_t, std::string>> last_field(const std::vector<std::string>& lines,
                                                             std::string_view label) {
    for (std::size_t i = lines.size(); i-- > 0;) {
        const std::string l = undecorate(lines[i]);
        if (l.size() <= label.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < label.size(); ++k) {
            if (std::toupper(static_cast<unsigned char>(l[k])) != label[k]) match = false;
        }
        if (!match) continue;
        const std::string rest = trim(std::string_view(l).substr(label.size()));
        if (!rest.empty() && rest.front() == ':') return std::make_pair(i, trim(rest.substr(1)));
    }
    return std::nullopt;
}

std::string squash_upper(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::optional<RouterProposal> parse_routing_reply(std::string_view text) {
    const auto lines = lines_of(text);
    const auto action = last_field(lines, "ACTION");
    if (!action) return std::nullopt;
    RouterProposal p;
    if (squash_upper(action->second) == "BACKTRACK") {
        p.backtrack = true;
    } else if (auto a = try_parse_action(action->second)) {
        p.action = *a;
    } else {
        return std::nullopt;
    }
    if (auto g = last_field(lines, "GUIDANCE"); g && g->first > action->first) {
        std::string guidance = g->second;
        for (std::size_t i = g->first + 1; i < lines.size(); ++i) guidance += "\n" + lines[i];
        p.guidance = trim(guidance);
    }
    return p;
}

std::optional<BacktrackFooter> parse_backtrack_reply(std::string_view text) {
    const auto lines = lines_of(text);
    const auto target = last_field(lines, "TARGET");
    if (!target) return std::nullopt;
    BacktrackFooter f;
    static const std::regex step_form(R"(^\[?\s*step\s*(\d+)\b)", std::regex::icase);
    static const std::regex node_form(R"(^\[?\s*node\s*(\d+)\b)", std::regex::icase);
    static const std::regex bare(R"(^(\d+)\b)");
    std::smatch m;
    if (std::regex_search(target->second, m, step_form) || std::regex_search(target->second, m, bare)) {
        f.step = std::stoul(m[1].str());
    } else if (std::regex_search(target->second, m, node_form)) {
        f.node = NodeId{static_cast<std::uint32_t>(std::stoul(m[1].str()))};
    } else {
        return std::nullopt;
    }
    if (auto r = last_field(lines, "REASON")) f.reason = try_parse_backtrack_reason(r->second);
    std::string rationale;
    for (std::size_t i = 0; i < target->first; ++i) rationale += lines[i] + "\n";
    f.rationale = trim(rationale);
    return f;
}

bool latest_hypothesis_verified(const AtomicTree& tree) {
    bool verified = false;
    for (NodeId id : tree.active_path()) {
        const Action a = tree.node(id).action;
        if (a == Action::HypothesisGeneration) verified = false;
        if (a == Action::HypothesisVerification) verified = true;
    }
    return verified;
}

bool has_completed_chain(const AtomicTree& tree) {
    for (const auto& [id, c] : tree.chains()) {
        if (id == tree.active_chain_id() || c.nodes.empty()) continue;
        if (tree.node(c.nodes.back()).action == Action::SummaryFinished) return true;
    }
    return false;
}

namespace {

CompletionRequest routing_request(const AtomicTree& tree, const RouterConfig& config, const Sop* sop,
                                  const PromptCatalog& catalog) {
    std::string schedule;
    if (sop != nullptr && !sop->scheduling_hints.empty()) {
        schedule = "\n# Scheduling hints for this kind of problem:\n\n" + sop->scheduling_hints + "\n";
    }
    CompletionRequest req;
    req.tag = std::string(tags::kRouting);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages.push_back({Role::System, catalog.get("router_system").render({})});
    req.messages.push_back({Role::User, catalog.get("router_user").render({
                                            {"problem", tree.problem().statement},
                                            {"tree", render_tree(tree, config.tree_budget)},
                                            {"schedule", schedule},
                                            {"rounds", std::to_string(tree.round_count())},
                                            {"max_rounds", std::to_string(config.max_rounds)},
                                        })});
    return req;
}

std::string verification_guidance(const AtomicTree& tree, NodeId hypothesis) {
    std::string out = std::string(default_guidance(Action::HypothesisVerification));
    static const std::regex marker(R"(^[\s\-*>#]*Hypothesis\s+\d+)", std::regex::icase);
    std::string listed;
    for (const auto& line : lines_of(tree.node(hypothesis).content)) {
        if (std::regex_search(line, marker)) listed += "\n" + trim(line);
    }
    if (!listed.empty()) out += "\nPending hypotheses:" + listed;
    return out;
}

std::string guidance_or_default(const std::string& guidance, Action action) {
    return guidance.empty() ? std::string(default_guidance(action)) : guidance;
}

}  // namespace

Backtrack select_backtrack_target(AtomicTree& tree, Backend& backend, const RouterConfig& config,
                                  const PromptCatalog& catalog) {
    const auto path = tree.active_path();
    if (path.empty()) throw Error(Errc::NoBacktrackCandidate, "the active path has no nodes");
    CompletionRequest req;
    req.tag = std::string(tags::kRouting);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages.push_back({Role::System, catalog.get("backtrack_system").render({})});
    req.messages.push_back({Role::User, catalog.get("backtrack_user").render({
                                            {"problem", tree.problem().statement},
                                            {"tree", render_tree(tree, config.tree_budget)},
                                            {"current_chain", render_steps(tree, path)},
                                        })});

    auto resolve = [&](const std::string& text) -> std::optional<Backtrack> {
        const auto f = parse_backtrack_reply(text);
        if (!f) return std::nullopt;
        std::optional<NodeId> target;
        if (f->step && *f->step >= 1 && *f->step <= path.size()) target = path[*f->step - 1];
        if (f->node && std::find(path.begin(), path.end(), *f->node) != path.end()) target = *f->node;
        if (!target) return std::nullopt;
        return Backtrack{*target, f->reason.value_or(BacktrackReason::UnexploredBranch), f->rationale};
    };

    CompletionResult r = charged_call(tree, backend, req);
    if (auto b = resolve(r.text)) return *b;
    tree.add_event("backtrack_reask", "");
    req.messages.push_back({Role::Assistant, r.text});
    req.messages.push_back({Role::User,
                            "That target is not a step of the current chain. End your reply with exactly two lines: "
                            "\"TARGET: Step <k>\" with k between 1 and " + std::to_string(path.size()) +
                                ", and \"REASON: <IncorrectContent | KeyNode | UnexploredBranch>\"."});
    r = charged_call(tree, backend, req);
    if (auto b = resolve(r.text)) return *b;

    NodeId fallback = path.back();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (tree.node(*it).action == Action::HypothesisGeneration) {
            fallback = *it;
            break;
        }
    }
    tree.add_event("backtrack_fallback", "node " + std::to_string(fallback.value));
    return Backtrack{fallback, BacktrackReason::UnexploredBranch, "fallback"};
}

RoutingDecision decide(AtomicTree& tree, const RouterConfig& config, Backend& backend, const Sop* sop,
                       const PromptCatalog& catalog) {
    config.validate();
    if (tree.terminated()) throw Error(Errc::Terminated, "tree is terminated");

    // R1: round cap.
    if (tree.round_count() >= static_cast<std::size_t>(config.max_rounds)) return Terminate{TerminationMode::PassiveLimit};

    const auto tail = tree.active_chain_tail();
    if (tail && tree.node(*tail).action == Action::SummaryFinished) {
        if (config.backtrack_after_summary && !has_completed_chain(tree) &&
            tree.chains().size() < static_cast<std::size_t>(config.max_chains)) {
            return select_backtrack_target(tree, backend, config, catalog);
        }
        return Terminate{TerminationMode::ActiveSolved};
    }

    CompletionRequest req = routing_request(tree, config, sop, catalog);
    CompletionResult r = charged_call(tree, backend, req);

    // R2: a fresh hypothesis is verified next; the backend only supplies guidance.
    if (tail && tree.node(*tail).action == Action::HypothesisGeneration) {
        const auto p = parse_routing_reply(r.text);
        std::string guidance = p && !p->backtrack && p->action == Action::HypothesisVerification ? p->guidance : "";
        if (guidance.empty()) guidance = verification_guidance(tree, *tail);
        return Extend{Action::HypothesisVerification, guidance};
    }

    auto proposal = parse_routing_reply(r.text);
    if (!proposal) {
        tree.add_event("router_reask", "");
        req.messages.push_back({Role::Assistant, r.text});
        req.messages.push_back({Role::User,
                                "Your reply did not end with the required footer. End your reply with exactly two "
                                "lines:\nACTION: <one of the six actions, or BACKTRACK>\nGUIDANCE: <instruction>"});
        r = charged_call(tree, backend, req);
        proposal = parse_routing_reply(r.text);
    }
    // R4 fallback.
    if (!proposal || (proposal->backtrack && tree.active_path().empty())) {
        tree.add_event("router_fallback", "");
        return Extend{Action::PremiseSummarization, std::string(default_guidance(Action::PremiseSummarization))};
    }

    if (proposal->backtrack) {
        if (tree.chains().size() >= static_cast<std::size_t>(config.max_chains)) {
            tree.add_event("chain_limit", "");
            return Terminate{TerminationMode::PassiveLimit};
        }
        Backtrack b = select_backtrack_target(tree, backend, config, catalog);
        return b;
    }

    const Action action = proposal->action;
    if (action == Action::SummaryFinished) {
        // R3: the first finish on an unverified path becomes a verification.
        if (config.force_verify_on_first_finish && !latest_hypothesis_verified(tree)) {
            if (tree.has_on_active_path(Action::HypothesisGeneration)) {
                tree.add_event("force_verify", "");
                return Extend{Action::HypothesisVerification,
                              "Before finishing, confirm the current conclusion: " +
                                  std::string(default_guidance(Action::HypothesisVerification))};
            }
            tree.add_event("force_hypothesis", "");
            return Extend{Action::HypothesisGeneration,
                          "Before finishing, state the candidate answer explicitly as a hypothesis so it can be "
                          "verified. " + std::string(default_guidance(Action::HypothesisGeneration))};
        }
        if (!config.backtrack_after_summary) return Terminate{TerminationMode::ActiveSolved};
        return Extend{Action::SummaryFinished, guidance_or_default(proposal->guidance, Action::SummaryFinished)};
    }
    if (action == Action::HypothesisVerification && !tree.has_on_active_path(Action::HypothesisGeneration)) {
        tree.add_event("verify_without_hypothesis", "");
        return Extend{Action::HypothesisGeneration, std::string(default_guidance(Action::HypothesisGeneration))};
    }
    return Extend{action, guidance_or_default(proposal->guidance, action)};
}

void compress_chain(AtomicTree& tree, ChainId chain, Backend& backend, const ExecutorConfig& config,
                    const PromptCatalog& catalog) {
    const auto& nodes = tree.chain(chain).nodes;
    if (nodes.empty()) return;
    CompletionRequest req;
    req.tag = std::string(tags::kSummarize);
    req.temperature = config.summarize_temperature;
    req.max_tokens = config.max_tokens;
    req.seed = config.seed;
    req.messages.push_back({Role::User, catalog.get("compress_user").render({
                                            {"problem", tree.problem().statement},
                                            {"content", render_steps(tree, nodes)},
                                        })});
    const CompletionResult r = charged_call_nonblank(tree, backend, req);
    tree.set_summary(chain, trim(r.text));
}

}  // namespace atomr
