#pragma once

#include "atomr/puzzle.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace atomr::test {

// Naive oracle: enumerate every full assignment as a product of per-attribute
// permutations and test each clue by reading positions directly.
inline int naive_house_of(const std::vector<std::vector<int>>& a, const Clue::Ref& r) {
    const auto& row = a[static_cast<std::size_t>(r.attribute)];
    return static_cast<int>(std::find(row.begin(), row.end(), r.value) - row.begin());
}

inline bool naive_holds(const std::vector<std::vector<int>>& a, const Clue& c) {
    const int ha = naive_house_of(a, c.a);
    switch (c.kind) {
        case ClueKind::FixedPosition: return ha == c.house;
        case ClueKind::LeftOf: return ha < naive_house_of(a, c.b);
        case ClueKind::Adjacent: return std::abs(ha - naive_house_of(a, c.b)) == 1;
        case ClueKind::SameHouse:
        case ClueKind::AttributeOfPerson: return ha == naive_house_of(a, c.b);
    }
    return false;
}

/// Number of assignments satisfying every clue; the last one found goes to `found`.
inline std::size_t naive_count(const GridSchema& s, const std::vector<Clue>& clues,
                               std::vector<std::vector<int>>* found = nullptr) {
    const auto n = static_cast<std::size_t>(s.houses);
    const std::size_t m = s.attributes.size();
    std::vector<std::vector<int>> perms;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    std::size_t total = 1;
    for (std::size_t i = 0; i < m; ++i) total *= perms.size();
    std::size_t count = 0;
    std::vector<std::vector<int>> a(m);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < m; ++i) {
            a[i] = perms[c % perms.size()];
            c /= perms.size();
        }
        if (std::all_of(clues.begin(), clues.end(), [&](const Clue& cl) { return naive_holds(a, cl); })) {
            ++count;
            if (found) *found = a;
        }
    }
    return count;
}

}  // namespace atomr::test
