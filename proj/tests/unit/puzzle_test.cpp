#include "atomr/error.hpp"
#include "atomr/puzzle.hpp"
#include "naive_grid.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace atomr {
namespace {

using test::naive_count;

TEST(Puzzle, TwoHundredSeedsHaveUniqueSolutions) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const int n = 3 + static_cast<int>(seed % 2);
        const GeneratedPuzzle p = gen_puzzle(seed, n, 3);
        std::vector<std::vector<int>> solution;
        ASSERT_EQ(naive_count(p.schema, p.clues, &solution), 1u) << "seed " << seed;
        EXPECT_EQ(solution, p.solution) << "seed " << seed;
        EXPECT_EQ(brute_solve(p.schema, p.clues).size(), 1u);
    }
}

TEST(Puzzle, ClueSetIsMinimal) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GeneratedPuzzle p = gen_puzzle(seed, 3, 3);
        for (std::size_t drop = 0; drop < p.clues.size(); ++drop) {
            auto fewer = p.clues;
            fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
            EXPECT_GT(naive_count(p.schema, fewer, nullptr), 1u) << "seed " << seed << " clue " << drop;
        }
    }
}

TEST(Puzzle, Deterministic) {
    const auto a = gen_puzzle(7, 4, 3);
    const auto b = gen_puzzle(7, 4, 3);
    EXPECT_EQ(a.statement, b.statement);
    EXPECT_EQ(a.clues, b.clues);
    EXPECT_NE(a.statement, gen_puzzle(8, 4, 3).statement);
}

TEST(Puzzle, StatementListsEveryClue) {
    const auto p = gen_puzzle(3, 3, 3);
    EXPECT_NE(p.statement.find("## Clues:"), std::string::npos);
    for (std::size_t i = 0; i < p.clues.size(); ++i) {
        EXPECT_NE(p.statement.find(std::to_string(i + 1) + ". " + clue_text(p.clues[i], p.schema)), std::string::npos);
    }
}

TEST(Puzzle, BruteSolveAgreesWithNaiveOnRandomClueSets) {
    const auto p = gen_puzzle(11, 3, 3);
    for (std::size_t k = 0; k <= p.clues.size(); ++k) {
        const std::vector<Clue> prefix(p.clues.begin(), p.clues.begin() + static_cast<std::ptrdiff_t>(k));
        EXPECT_EQ(brute_solve(p.schema, prefix).size(), naive_count(p.schema, prefix, nullptr));
    }
}

TEST(Puzzle, Preconditions) {
    auto code = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::Io;
    };
    EXPECT_EQ(code([] { gen_puzzle(0, 1, 3); }), Errc::PreconditionFailed);
    EXPECT_EQ(code([] { gen_puzzle(0, 6, 3); }), Errc::PreconditionFailed);
    EXPECT_EQ(code([] { gen_puzzle(0, 3, 5); }), Errc::PreconditionFailed);
    GridSchema big{6, {{"Name", {"a", "b", "c", "d", "e", "f"}}}};
    EXPECT_EQ(code([&] { brute_solve(big, {}); }), Errc::TooLarge);
    GridSchema s{3, {{"Name", {"a", "b", "c"}}}};
    EXPECT_EQ(code([&] { validate_clue(Clue{ClueKind::FixedPosition, {0, 0}, {}, 3}, s); }), Errc::InvalidProblem);
    EXPECT_EQ(code([&] { validate_clue(Clue{ClueKind::LeftOf, {0, 0}, {1, 0}, 0}, s); }), Errc::InvalidProblem);
}

TEST(Puzzle, LimitStopsEarly) {
    GridSchema s{3, {{"Name", {"a", "b", "c"}}, {"Color", {"red", "green", "blue"}}}};
    EXPECT_EQ(brute_solve(s, {}).size(), 36u);
    EXPECT_EQ(brute_solve(s, {}, 2).size(), 2u);
}

}  // namespace
}  // namespace atomr
