#pragma once

#include "atomr/action.hpp"
#include "atomr/problem.hpp"
#include "atomr/taxonomy.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace atomr {

struct NodeId {
    std::uint32_t value = 0;
    auto operator<=>(const NodeId&) const = default;
};

struct ChainId {
    std::uint32_t value = 0;
    auto operator<=>(const ChainId&) const = default;
};

struct Node {
    NodeId id;
    Action action = Action::PremiseDiscovery;
    std::string guidance;
    std::string content;
    std::vector<CheckReport> check_reports;
    int revisions = 0;
    // Set when the node needs checker attention: an unmarked hypothesis, or a
    // revision cap reached with the checker still reporting an error.
    bool flagged = false;
    int created_round = 0;

    bool revised() const noexcept { return revisions > 0; }
    bool operator==(const Node&) const = default;
};

enum class ChainStatus { Active, Suspended, Dormant };

std::string_view to_string(ChainStatus s) noexcept;
std::optional<ChainStatus> try_parse_chain_status(std::string_view text);

/// Node `index` (zero-based) of `chain` is the node a branch grows from.
struct BranchPoint {
    ChainId chain;
    std::size_t index = 0;
    bool operator==(const BranchPoint&) const = default;
};

struct Chain {
    ChainId id;
    std::optional<BranchPoint> parent;
    std::vector<NodeId> nodes;
    ChainStatus status = ChainStatus::Active;
    std::optional<std::string> summary;

    bool operator==(const Chain&) const = default;
};

enum class TerminationMode { ActiveSolved, PassiveLimit };

std::string_view to_string(TerminationMode m) noexcept;
std::optional<TerminationMode> try_parse_termination_mode(std::string_view text);

struct Termination {
    TerminationMode mode = TerminationMode::ActiveSolved;
    std::string final_answer;
    bool operator==(const Termination&) const = default;
};

/// Noteworthy engine events (fallbacks, fail-opens, backtracks) kept in the trace.
struct TraceEvent {
    int round = 0;
    std::string kind;
    std::string detail;
    bool operator==(const TraceEvent&) const = default;
};

struct Usage {
    std::int64_t calls = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
    bool operator==(const Usage&) const = default;
};

/// Scoring annotation attached by the benchmark harness.
struct Evaluation {
    std::string suite;
    bool correct = false;
    double partial = 0.0;
    bool operator==(const Evaluation&) const = default;
};

/// Plain data behind an AtomicTree. Exposed so serialization can rebuild a
/// tree; AtomicTree::from_state re-validates every invariant.
struct TreeState {
    Problem problem;
    std::map<ChainId, Chain> chains;
    std::map<NodeId, Node> nodes;
    ChainId active;
    std::optional<Termination> termination;
    std::vector<TraceEvent> events;
    Usage usage;
    std::optional<Evaluation> evaluation;
    std::uint32_t next_node = 1;
    std::uint32_t next_chain = 1;

    bool operator==(const TreeState&) const = default;
};

class AtomicTree {
public:
    /// One empty Active root chain. Throws Error(EmptyProblem) on a blank statement.
    explicit AtomicTree(Problem problem);

    /// Throws Error(InvalidTransition) describing the first broken invariant.
    static AtomicTree from_state(TreeState state);

    const TreeState& state() const noexcept { return s_; }
    const Problem& problem() const noexcept { return s_.problem; }
    const std::map<ChainId, Chain>& chains() const noexcept { return s_.chains; }
    const std::map<NodeId, Node>& nodes() const noexcept { return s_.nodes; }
    const std::vector<TraceEvent>& events() const noexcept { return s_.events; }
    const Usage& usage() const noexcept { return s_.usage; }
    const std::optional<Evaluation>& evaluation() const noexcept { return s_.evaluation; }
    const std::optional<Termination>& termination() const noexcept { return s_.termination; }

    std::size_t round_count() const noexcept { return s_.nodes.size(); }
    bool terminated() const noexcept { return s_.termination.has_value(); }

    ChainId active_chain_id() const noexcept { return s_.active; }
    const Chain& active_chain() const { return chain(s_.active); }
    const Chain& chain(ChainId id) const;
    const Node& node(NodeId id) const;
    bool contains(NodeId id) const { return s_.nodes.contains(id); }

    /// Node ids from the root to the tip of `chain`, following branch points.
    std::vector<NodeId> path_to(ChainId chain) const;
    std::vector<NodeId> active_path() const { return path_to(s_.active); }
    /// Zero-based position of `id` on the active path.
    std::optional<std::size_t> position_on_active_path(NodeId id) const;
    /// Chain holding `id` and the node's index in it.
    std::optional<BranchPoint> locate(NodeId id) const;
    /// Last node of the active chain itself (not its ancestry).
    std::optional<NodeId> active_chain_tail() const;
    bool has_on_active_path(Action action) const;

    NodeId append_node(Action action, std::string guidance, std::string content);

    /// Ends the active chain with `leave_as` (Suspended or Dormant) and opens a
    /// new, empty Active chain whose branch point is `target`.
    ChainId branch_at(NodeId target, ChainStatus leave_as = ChainStatus::Suspended);

    /// Makes a Dormant chain Active again, dropping its summary; the current
    /// active chain goes Dormant.
    void reactivate(ChainId dormant);

    void set_summary(ChainId chain, std::string summary);
    void set_termination(TerminationMode mode, std::string final_answer);

    void record_check(NodeId id, CheckReport report);
    void revise_content(NodeId id, std::string content);
    void flag(NodeId id);

    void add_event(std::string kind, std::string detail);
    void add_usage(std::int64_t prompt_tokens, std::int64_t completion_tokens,
                   std::int64_t latency_ms);
    /// Annotation only; permitted after termination.
    void set_evaluation(Evaluation evaluation) { s_.evaluation = std::move(evaluation); }

    bool operator==(const AtomicTree& other) const { return s_ == other.s_; }

private:
    AtomicTree() = default;
    void require_live() const;
    Node& mutable_node(NodeId id);

    TreeState s_;
};

/// Empty when the state is consistent, otherwise a description of the first
/// violated invariant.
std::optional<std::string> check_invariants(const TreeState& state);

inline AtomicTree new_tree(Problem problem) { return AtomicTree(std::move(problem)); }

}  // namespace atomr
