#pragma once

#include "atomr/answers.hpp"
#include "atomr/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace atomr {

enum class ClueKind { FixedPosition, LeftOf, Adjacent, SameHouse, AttributeOfPerson };

std::string_view to_string(ClueKind k) noexcept;
std::optional<ClueKind> try_parse_clue_kind(std::string_view text);

/// A constraint over (attribute, value) pairs, all by index into the schema.
/// FixedPosition uses only `a` and `house`; AttributeOfPerson requires
/// `a.attribute == 0` (the name attribute). LeftOf is strict: A is in some
/// house left of B, not necessarily adjacent.
struct Clue {
    struct Ref {
        int attribute = 0;
        int value = 0;
        bool operator==(const Ref&) const = default;
    };
    ClueKind kind = ClueKind::FixedPosition;
    Ref a;
    Ref b;
    int house = 0;  // zero-based, FixedPosition only
    bool operator==(const Clue&) const = default;
};

/// perm[attribute][house] = value index.
using Assignment = std::vector<std::vector<int>>;

/// Throws Error(InvalidProblem) when a clue references a missing attribute,
/// value or house.
void validate_clue(const Clue& clue, const GridSchema& schema);

bool satisfies(const Assignment& assignment, const Clue& clue);

/// English sentence for a clue.
std::string clue_text(const Clue& clue, const GridSchema& schema);

/// Every assignment consistent with the clues, in lexicographic
/// permutation order. Stops early once `limit` solutions are found (0 means
/// no limit). Throws Error(TooLarge) when houses > 5.
std::vector<Assignment> brute_solve(const GridSchema& schema, const std::vector<Clue>& clues, std::size_t limit = 0);

Grid to_grid(const Assignment& assignment, const GridSchema& schema);

struct GeneratedPuzzle {
    std::string id;
    std::string statement;
    GridSchema schema;
    std::vector<Clue> clues;
    Assignment solution;
};

/// Seeded logic-grid puzzle with exactly one solution and a minimal clue
/// set. `attributes` counts the name attribute. Requires 2 <= houses <= 5
/// and 1 <= attributes <= 4 (Error(PreconditionFailed)); throws
/// Error(GenerationExhausted) if no unique puzzle is found within budget.
GeneratedPuzzle gen_puzzle(std::uint64_t seed, int houses, int attributes);

/// Problem statement listing the attributes and numbered clues.
std::string puzzle_statement(const GridSchema& schema, const std::vector<Clue>& clues);

}  // namespace atomr
