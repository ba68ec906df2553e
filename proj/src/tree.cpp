#include "atomr/tree.hpp"

#include "atomr/error.hpp"

#include <algorithm>
#include <set>

namespace atomr {

std::string_view to_string(ChainStatus s) noexcept {
    switch (s) {
        case ChainStatus::Active: return "active";
        case ChainStatus::Suspended: return "suspended";
        case ChainStatus::Dormant: return "dormant";
    }
    return "";
}

std::optional<ChainStatus> try_parse_chain_status(std::string_view text) {
    if (text == "active") return ChainStatus::Active;
    if (text == "suspended") return ChainStatus::Suspended;
    if (text == "dormant") return ChainStatus::Dormant;
    return std::nullopt;
}

std::string_view to_string(TerminationMode m) noexcept {
    return m == TerminationMode::ActiveSolved ? "active_solved" : "passive_limit";
}

std::optional<TerminationMode> try_parse_termination_mode(std::string_view text) {
    if (text == "active_solved") return TerminationMode::ActiveSolved;
    if (text == "passive_limit") return TerminationMode::PassiveLimit;
    return std::nullopt;
}

AtomicTree::AtomicTree(Problem problem) {
    validate(problem);
    s_.problem = std::move(problem);
    const ChainId root{s_.next_chain++};
    s_.chains.emplace(root, Chain{root, std::nullopt, {}, ChainStatus::Active, std::nullopt});
    s_.active = root;
}

AtomicTree AtomicTree::from_state(TreeState state) {
    if (auto problem = check_invariants(state)) throw Error(Errc::InvalidTransition, *problem);
    AtomicTree tree;
    tree.s_ = std::move(state);
    return tree;
}

const Chain& AtomicTree::chain(ChainId id) const {
    auto it = s_.chains.find(id);
    if (it == s_.chains.end()) {
        throw Error(Errc::UnknownChain, "chain " + std::to_string(id.value));
    }
    return it->second;
}

const Node& AtomicTree::node(NodeId id) const {
    auto it = s_.nodes.find(id);
    if (it == s_.nodes.end()) throw Error(Errc::UnknownNode, "node " + std::to_string(id.value));
    return it->second;
}

Node& AtomicTree::mutable_node(NodeId id) {
    auto it = s_.nodes.find(id);
    if (it == s_.nodes.end()) throw Error(Errc::UnknownNode, "node " + std::to_string(id.value));
    return it->second;
}

std::vector<NodeId> AtomicTree::path_to(ChainId id) const {
    // Collect the chain ancestry tip-first, then emit root-first.
    std::vector<std::pair<const Chain*, std::size_t>> segments;
    const Chain* c = &chain(id);
    std::size_t take = c->nodes.size();
    while (true) {
        segments.emplace_back(c, take);
        if (!c->parent) break;
        take = c->parent->index + 1;
        c = &chain(c->parent->chain);
    }
    std::vector<NodeId> path;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        const auto& nodes = it->first->nodes;
        path.insert(path.end(), nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(it->second));
    }
    return path;
}

std::optional<std::size_t> AtomicTree::position_on_active_path(NodeId id) const {
    const auto path = active_path();
    auto it = std::find(path.begin(), path.end(), id);
    if (it == path.end()) return std::nullopt;
    return static_cast<std::size_t>(it - path.begin());
}

std::optional<BranchPoint> AtomicTree::locate(NodeId id) const {
    for (const auto& [cid, c] : s_.chains) {
        auto it = std::find(c.nodes.begin(), c.nodes.end(), id);
        if (it != c.nodes.end()) return BranchPoint{cid, static_cast<std::size_t>(it - c.nodes.begin())};
    }
    return std::nullopt;
}

std::optional<NodeId> AtomicTree::active_chain_tail() const {
    const auto& nodes = active_chain().nodes;
    if (nodes.empty()) return std::nullopt;
    return nodes.back();
}

bool AtomicTree::has_on_active_path(Action action) const {
    for (NodeId id : active_path()) {
        if (node(id).action == action) return true;
    }
    return false;
}

void AtomicTree::require_live() const {
    if (terminated()) throw Error(Errc::Terminated, "tree is terminated");
}

NodeId AtomicTree::append_node(Action action, std::string guidance, std::string content) {
    require_live();
    if (action == Action::HypothesisVerification &&
        !has_on_active_path(Action::HypothesisGeneration)) {
        throw Error(Errc::MissingHypothesis, "no hypothesis on the active path to verify");
    }
    if (content.empty()) throw Error(Errc::PreconditionFailed, "node content must be non-empty");
    const NodeId id{s_.next_node++};
    Node n;
    n.id = id;
    n.action = action;
    n.guidance = std::move(guidance);
    n.content = std::move(content);
    n.created_round = static_cast<int>(s_.nodes.size()) + 1;
    s_.nodes.emplace(id, std::move(n));
    s_.chains.at(s_.active).nodes.push_back(id);
    return id;
}

ChainId AtomicTree::branch_at(NodeId target, ChainStatus leave_as) {
    require_live();
    if (leave_as == ChainStatus::Active) {
        throw Error(Errc::InvalidTransition, "the chain being left cannot stay active");
    }
    if (!position_on_active_path(target)) {
        throw Error(Errc::NodeNotOnActivePath,
                    "node " + std::to_string(target.value) + " is not on the active path");
    }
    const BranchPoint at = *locate(target);
    s_.chains.at(s_.active).status = leave_as;
    const ChainId id{s_.next_chain++};
    s_.chains.emplace(id, Chain{id, at, {}, ChainStatus::Active, std::nullopt});
    s_.active = id;
    return id;
}

void AtomicTree::reactivate(ChainId dormant) {
    require_live();
    auto it = s_.chains.find(dormant);
    if (it == s_.chains.end()) throw Error(Errc::UnknownChain, std::to_string(dormant.value));
    if (it->second.status != ChainStatus::Dormant) {
        throw Error(Errc::InvalidTransition, "only a dormant chain can be reactivated");
    }
    s_.chains.at(s_.active).status = ChainStatus::Dormant;
    it->second.status = ChainStatus::Active;
    it->second.summary.reset();
    s_.active = dormant;
}

void AtomicTree::set_summary(ChainId id, std::string summary) {
    require_live();
    auto it = s_.chains.find(id);
    if (it == s_.chains.end()) throw Error(Errc::UnknownChain, std::to_string(id.value));
    if (it->second.status == ChainStatus::Active) {
        throw Error(Errc::InvalidTransition, "an active chain cannot carry a summary");
    }
    it->second.summary = std::move(summary);
}

void AtomicTree::set_termination(TerminationMode mode, std::string final_answer) {
    if (terminated()) throw Error(Errc::AlreadyTerminated, "termination already recorded");
    s_.termination = Termination{mode, std::move(final_answer)};
}

void AtomicTree::record_check(NodeId id, CheckReport report) {
    require_live();
    mutable_node(id).check_reports.push_back(std::move(report));
}

void AtomicTree::revise_content(NodeId id, std::string content) {
    require_live();
    if (content.empty()) throw Error(Errc::PreconditionFailed, "revised content must be non-empty");
    Node& n = mutable_node(id);
    n.content = std::move(content);
    ++n.revisions;
}

void AtomicTree::flag(NodeId id) {
    require_live();
    mutable_node(id).flagged = true;
}

void AtomicTree::add_event(std::string kind, std::string detail) {
    require_live();
    s_.events.push_back(TraceEvent{static_cast<int>(round_count()), std::move(kind), std::move(detail)});
}

void AtomicTree::add_usage(std::int64_t prompt_tokens, std::int64_t completion_tokens,
                           std::int64_t latency_ms) {
    require_live();
    ++s_.usage.calls;
    s_.usage.prompt_tokens += prompt_tokens;
    s_.usage.completion_tokens += completion_tokens;
    s_.usage.latency_ms += latency_ms;
}

std::optional<std::string> check_invariants(const TreeState& s) {
    if (s.problem.statement.find_first_not_of(" \t\r\n") == std::string::npos) {
        return "problem statement is blank";
    }
    if (s.chains.empty()) return "tree has no chains";
    if (!s.chains.contains(s.active)) return "active chain does not exist";

    std::size_t active_count = 0;
    std::map<NodeId, BranchPoint> owner;
    for (const auto& [id, c] : s.chains) {
        if (c.id != id) return "chain key/id mismatch";
        if (id.value >= s.next_chain) return "chain id beyond next_chain";
        if (c.status == ChainStatus::Active) ++active_count;
        if (c.summary && c.status == ChainStatus::Active) return "active chain carries a summary";
        for (std::size_t i = 0; i < c.nodes.size(); ++i) {
            if (!s.nodes.contains(c.nodes[i])) return "chain references a missing node";
            if (!owner.emplace(c.nodes[i], BranchPoint{id, i}).second) {
                return "node appears in more than one chain position";
            }
        }
    }
    if (active_count != 1) return "expected exactly one active chain";
    if (s.chains.at(s.active).status != ChainStatus::Active) return "active chain is not Active";
    if (owner.size() != s.nodes.size()) return "node not attached to any chain";

    // Parent links: exactly one root, every parent exists, no cycles.
    std::size_t roots = 0;
    for (const auto& [id, c] : s.chains) {
        if (!c.parent) {
            ++roots;
            continue;
        }
        auto pit = s.chains.find(c.parent->chain);
        if (pit == s.chains.end()) return "branch point references a missing chain";
        if (c.parent->index >= pit->second.nodes.size()) return "branch point index out of range";
        std::set<ChainId> seen{id};
        const Chain* walk = &c;
        while (walk->parent) {
            if (!seen.insert(walk->parent->chain).second) return "chain parent links form a cycle";
            walk = &s.chains.at(walk->parent->chain);
        }
    }
    if (roots != 1) return "expected a single root chain";

    std::vector<int> rounds;
    for (const auto& [id, n] : s.nodes) {
        if (n.id != id) return "node key/id mismatch";
        if (id.value >= s.next_node) return "node id beyond next_node";
        if (n.content.empty()) return "executed node has empty content";
        rounds.push_back(n.created_round);
    }
    std::sort(rounds.begin(), rounds.end());
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        if (rounds[i] != static_cast<int>(i) + 1) return "created_round values are not 1..N";
    }

    // Every verification must have a generation earlier on its own path.
    for (const auto& [cid, c] : s.chains) {
        for (std::size_t i = 1; i < c.nodes.size(); ++i) {
            if (s.nodes.at(c.nodes[i]).created_round <= s.nodes.at(c.nodes[i - 1]).created_round) {
                return "created_round not increasing along a chain";
            }
        }
        std::vector<std::pair<const Chain*, std::size_t>> segs;
        const Chain* walk = &c;
        std::size_t take = walk->nodes.size();
        while (true) {
            segs.emplace_back(walk, take);
            if (!walk->parent) break;
            take = walk->parent->index + 1;
            walk = &s.chains.at(walk->parent->chain);
        }
        bool seen_generation = false;
        for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
            for (std::size_t i = 0; i < it->second; ++i) {
                const Node& n = s.nodes.at(it->first->nodes[i]);
                if (n.action == Action::HypothesisGeneration) seen_generation = true;
                if (n.action == Action::HypothesisVerification && !seen_generation) {
                    return "verification without a preceding generation";
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace atomr
