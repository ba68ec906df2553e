#pragma once

#include "atomr/action.hpp"
#include "atomr/backend.hpp"
#include "atomr/problem.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace atomr {

struct SopExample {
    std::string problem_excerpt;
    std::string worked_step;
    bool operator==(const SopExample&) const = default;
};

/// Standard operating procedure for one problem domain.
struct Sop {
    std::string domain;
    std::map<Action, std::string> action_strategies;
    std::string scheduling_hints;
    std::vector<SopExample> examples;
    /// Triage vocabulary. Alphanumeric keywords match whole words
    /// case-insensitively; anything containing a symbol matches as a substring.
    std::vector<std::string> keywords;
};

inline constexpr std::string_view kDefaultDomain = "default";

class SopRegistry {
public:
    /// Registry holding a single empty default SOP (the "no SOP" ablation).
    static SopRegistry minimal();

    /// Inserts or replaces by domain; replacing records a warning.
    void add(Sop sop);

    bool contains(std::string_view domain) const { return sops_.find(domain) != sops_.end(); }
    const Sop& get(std::string_view domain) const;
    const Sop& default_sop() const { return get(kDefaultDomain); }
    std::size_t size() const noexcept { return sops_.size(); }
    std::vector<std::string> domains() const;
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::map<std::string, Sop, std::less<>> sops_;
    std::vector<std::string> warnings_;
};

/// Parses one .sop document. `source` names it in ParseError locations.
Sop parse_sop(std::string_view text, const std::string& source);

/// Loads a single .sop file or every *.sop in a directory (sorted by name).
/// Duplicate domains: last one wins, with a warning. Throws
/// Error(MissingDefault) if no SOP declares the "default" domain.
SopRegistry load_sops(const std::filesystem::path& path);

/// Exact stored strategy for `action`, or empty when the SOP has none.
const std::string& sop_guidance(const Sop& sop, Action action);

struct TriageOutcome {
    std::string domain;
    bool used_backend = false;
    std::optional<CompletionResult> call;
};

/// Keyword vote first; on a tie or no hits, one constrained classification
/// call when a backend is supplied; otherwise "default". Always returns a
/// label present in the registry.
TriageOutcome triage_problem(const Problem& problem, const SopRegistry& registry, Backend* backend = nullptr);

inline std::string triage(const Problem& problem, const SopRegistry& registry, Backend* backend = nullptr) {
    return triage_problem(problem, registry, backend).domain;
}

}  // namespace atomr
