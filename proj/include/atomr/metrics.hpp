#pragma once

#include "atomr/action.hpp"
#include "atomr/tree.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atomr {

/// Finite distribution over labelled outcomes.
struct DiscreteDistribution {
    std::vector<std::pair<std::string, double>> outcomes;
};

/// Throws Error(InvalidDistribution) unless every p >= 0 and the sum is 1 within 1e-9.
void validate(const DiscreteDistribution& dist);

/// Empirical distribution of `samples`, labels in sorted order.
DiscreteDistribution from_samples(const std::vector<std::string>& samples);

/// Shannon entropy in bits; 0 log 0 is taken as 0.
double entropy(const DiscreteDistribution& dist);
double entropy(const std::vector<double>& probabilities);

/// sum_j r[j] * e[j]. Throws Error(DimensionMismatch) on unequal lengths and
/// Error(InvalidDistribution) when r is not a distribution or e has a negative entry.
double weighted_step_entropy(const std::vector<double>& r, const std::vector<double>& e);

/// r[i][j]: probability that step i selects action j (kAllActions order).
struct ActionSelectionProfile {
    std::vector<std::array<double, kActionCount>> r;

    std::size_t steps() const noexcept { return r.size(); }
    static constexpr std::size_t actions() noexcept { return kActionCount; }
    std::vector<double> row(std::size_t step) const { return {r.at(step).begin(), r.at(step).end()}; }
};

/// Step i is the i-th node on each trace's final path; traces shorter than i
/// do not contribute to row i.
ActionSelectionProfile action_selection_profile(const std::vector<TreeState>& traces);

struct TraceStats {
    std::size_t rounds = 0;
    std::map<Action, std::size_t> histogram;  // always holds all six actions
    std::size_t chains = 0;                   // chains holding at least one node
    std::size_t backtracks = 0;
    std::size_t verifications = 0;
    std::size_t checks = 0;
    std::size_t check_errors = 0;
    std::size_t revisions = 0;
    std::size_t flagged = 0;
    Usage usage;

    bool operator==(const TraceStats&) const = default;
};

TraceStats trace_stats(const TreeState& tree);

/// Canonical JSON: sorted keys, two-space indent, trailing newline. Equal
/// trees give identical bytes.
std::string serialize_trace(const TreeState& tree);
inline std::string serialize_trace(const AtomicTree& tree) { return serialize_trace(tree.state()); }

/// Throws ParseError whose location is a JSON path ("$.nodes[3].action").
AtomicTree deserialize_trace(std::string_view document);

AtomicTree load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path, const AtomicTree& tree);

struct SftMeta {
    std::string suite;
    std::size_t rounds = 0;
    bool correct = false;
    bool operator==(const SftMeta&) const = default;
};

struct SftRecord {
    std::string instruction;
    std::string reasoning;
    std::string answer;
    SftMeta meta;
    bool operator==(const SftRecord&) const = default;
};

enum class SftFilter { All, CorrectOnly };

std::string_view to_string(SftFilter f) noexcept;
std::optional<SftFilter> try_parse_sft_filter(std::string_view text);

struct SftOptions {
    SftFilter filter = SftFilter::CorrectOnly;
    /// Drop records whose three text fields together exceed this many bytes; 0 keeps all.
    std::size_t max_chars = 0;
};

/// Only terminated trees are exported. The reasoning lists the final path as
/// "Step k (<Action>): <content>" lines with revised content.
std::vector<SftRecord> to_sft_records(const std::vector<TreeState>& trees, const SftOptions& options = {});

std::string sft_to_jsonl(const std::vector<SftRecord>& records);
void write_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records);

}  // namespace atomr
