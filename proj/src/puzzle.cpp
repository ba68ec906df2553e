#include "atomr/puzzle.hpp"

#include "atomr/error.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

namespace atomr {

std::string_view to_string(ClueKind k) noexcept {
    switch (k) {
        case ClueKind::FixedPosition: return "fixed_position";
        case ClueKind::LeftOf: return "left_of";
        case ClueKind::Adjacent: return "adjacent";
        case ClueKind::SameHouse: return "same_house";
        case ClueKind::AttributeOfPerson: return "attribute_of_person";
    }
    return "";
}

std::optional<ClueKind> try_parse_clue_kind(std::string_view text) {
    for (auto k : {ClueKind::FixedPosition, ClueKind::LeftOf, ClueKind::Adjacent, ClueKind::SameHouse,
                   ClueKind::AttributeOfPerson}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

namespace {

bool ref_ok(const Clue::Ref& r, const GridSchema& s) {
    return r.attribute >= 0 && static_cast<std::size_t>(r.attribute) < s.attributes.size() && r.value >= 0 &&
           static_cast<std::size_t>(r.value) < s.attributes[static_cast<std::size_t>(r.attribute)].values.size();
}

int house_of(const Assignment& p, const Clue::Ref& r) {
    const auto& row = p[static_cast<std::size_t>(r.attribute)];
    for (std::size_t h = 0; h < row.size(); ++h) {
        if (row[h] == r.value) return static_cast<int>(h);
    }
    return -1;
}

}  // namespace

void validate_clue(const Clue& c, const GridSchema& s) {
    if (!ref_ok(c.a, s)) throw Error(Errc::InvalidProblem, "clue references an unknown attribute value");
    switch (c.kind) {
        case ClueKind::FixedPosition:
            if (c.house < 0 || c.house >= s.houses) throw Error(Errc::InvalidProblem, "clue house out of range");
            return;
        case ClueKind::AttributeOfPerson:
            if (c.a.attribute != 0) throw Error(Errc::InvalidProblem, "attribute_of_person must start from a name");
            break;
        default:
            break;
    }
    if (!ref_ok(c.b, s)) throw Error(Errc::InvalidProblem, "clue references an unknown attribute value");
}

bool satisfies(const Assignment& p, const Clue& c) {
    const int ha = house_of(p, c.a);
    if (c.kind == ClueKind::FixedPosition) return ha == c.house;
    const int hb = house_of(p, c.b);
    switch (c.kind) {
        case ClueKind::LeftOf: return ha < hb;
        case ClueKind::Adjacent: return ha - hb == 1 || hb - ha == 1;
        case ClueKind::SameHouse:
        case ClueKind::AttributeOfPerson: return ha == hb;
        default: return false;
    }
}

namespace {

std::string ordinal(int k) {
    static const std::array<const char*, 5> words = {"first", "second", "third", "fourth", "fifth"};
    return k >= 0 && k < 5 ? words[static_cast<std::size_t>(k)] : std::to_string(k + 1) + "th";
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string describe(const Clue::Ref& r, const GridSchema& s, bool capital) {
    const auto& attr = s.attributes[static_cast<std::size_t>(r.attribute)];
    const std::string& v = attr.values[static_cast<std::size_t>(r.value)];
    if (r.attribute == 0) return v;
    return std::string(capital ? "The" : "the") + " person whose " + lower(attr.name) + " is " + v;
}

}  // namespace

std::string clue_text(const Clue& c, const GridSchema& s) {
    const std::string a = describe(c.a, s, true);
    switch (c.kind) {
        case ClueKind::FixedPosition: return a + " is in the " + ordinal(c.house) + " house.";
        case ClueKind::LeftOf: return a + " is somewhere to the left of " + describe(c.b, s, false) + ".";
        case ClueKind::Adjacent: return a + " and " + describe(c.b, s, false) + " are next to each other.";
        case ClueKind::SameHouse:
        case ClueKind::AttributeOfPerson: return a + " is " + describe(c.b, s, false) + ".";
    }
    return "";
}

namespace {

// Highest attribute index a clue touches; it can be tested once attributes
// 0..that index are assigned.
int depth_of(const Clue& c) {
    return c.kind == ClueKind::FixedPosition ? c.a.attribute : std::max(c.a.attribute, c.b.attribute);
}

struct Solver {
    const GridSchema& schema;
    std::vector<std::vector<const Clue*>> by_depth;
    std::vector<std::vector<int>> perms;
    Assignment current;
    std::vector<Assignment> found;
    std::size_t limit;

    void run(std::size_t attr) {
        if (limit != 0 && found.size() >= limit) return;
        if (attr == schema.attributes.size()) {
            found.push_back(current);
            return;
        }
        for (const auto& perm : perms) {
            current[attr] = perm;
            bool ok = true;
            for (const Clue* c : by_depth[attr]) {
                if (!satisfies(current, *c)) {
                    ok = false;
                    break;
                }
            }
            if (ok) run(attr + 1);
            if (limit != 0 && found.size() >= limit) return;
        }
    }
};

}  // namespace

std::vector<Assignment> brute_solve(const GridSchema& schema, const std::vector<Clue>& clues, std::size_t limit) {
    if (schema.houses > 5) throw Error(Errc::TooLarge, "brute force supports at most 5 houses");
    if (schema.houses < 1 || schema.attributes.empty()) throw Error(Errc::InvalidProblem, "empty grid schema");
    for (const auto& a : schema.attributes) {
        if (a.values.size() != static_cast<std::size_t>(schema.houses)) {
            throw Error(Errc::InvalidProblem, "attribute '" + a.name + "' needs one value per house");
        }
    }
    for (const auto& c : clues) validate_clue(c, schema);
    Solver s{schema, std::vector<std::vector<const Clue*>>(schema.attributes.size()), {}, {}, {}, limit};
    for (const auto& c : clues) s.by_depth[static_cast<std::size_t>(depth_of(c))].push_back(&c);
    std::vector<int> p(static_cast<std::size_t>(schema.houses));
    std::iota(p.begin(), p.end(), 0);
    do {
        s.perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    s.current.assign(schema.attributes.size(), {});
    s.run(0);
    return std::move(s.found);
}

Grid to_grid(const Assignment& p, const GridSchema& schema) {
    Grid g(static_cast<std::size_t>(schema.houses), std::vector<std::optional<std::string>>(schema.attributes.size()));
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t h = 0; h < p[a].size(); ++h) {
            g[h][a] = schema.attributes[a].values[static_cast<std::size_t>(p[a][h])];
        }
    }
    return g;
}

std::string puzzle_statement(const GridSchema& schema, const std::vector<Clue>& clues) {
    const std::string n = std::to_string(schema.houses);
    std::string out = "There are " + n + " houses, numbered 1 to " + n +
                      " from left to right, as seen from across the street. Each house is occupied by a different "
                      "person. Each house has a unique attribute for each of the following characteristics:\n";
    for (const auto& a : schema.attributes) {
        out += "\n- " + a.name + ":";
        for (std::size_t i = 0; i < a.values.size(); ++i) out += (i ? ", `" : " `") + a.values[i] + "`";
    }
    out += "\n\n## Clues:\n";
    for (std::size_t i = 0; i < clues.size(); ++i) out += "\n" + std::to_string(i + 1) + ". " + clue_text(clues[i], schema);
    return out;
}

namespace {

struct Pool {
    const char* name;
    std::array<const char*, 7> values;
};

constexpr std::array<Pool, 6> kPools = {{
    {"Name", {"Alice", "Bob", "Carol", "David", "Emma", "Frank", "Grace"}},
    {"Color", {"red", "green", "blue", "yellow", "white", "black", "purple"}},
    {"Pet", {"cat", "dog", "bird", "fish", "horse", "rabbit", "turtle"}},
    {"Drink", {"tea", "coffee", "milk", "water", "juice", "cocoa", "lemonade"}},
    {"Sport", {"tennis", "soccer", "golf", "hockey", "rugby", "cricket", "baseball"}},
    {"Hobby", {"painting", "chess", "gardening", "cooking", "knitting", "hiking", "pottery"}},
}};

// Uniform integer in [0, bound) by rejection; independent of library
// distribution implementations so seeds reproduce across platforms.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

Clue random_true_clue(const Assignment& sol, const GridSchema& s, std::mt19937_64& rng) {
    const int n = s.houses;
    const int m = static_cast<int>(s.attributes.size());
    auto value_at = [&](int attr, int house) {
        return Clue::Ref{attr, sol[static_cast<std::size_t>(attr)][static_cast<std::size_t>(house)]};
    };
    while (true) {
        const auto kind = static_cast<ClueKind>(bounded(rng, 5));
        Clue c;
        c.kind = kind;
        switch (kind) {
            case ClueKind::FixedPosition: {
                c.house = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
                c.a = value_at(static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m))), c.house);
                return c;
            }
            case ClueKind::LeftOf:
            case ClueKind::Adjacent: {
                const int h1 = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
                int h2;
                if (kind == ClueKind::Adjacent) {
                    h2 = h1 + (bounded(rng, 2) ? 1 : -1);
                    if (h2 < 0 || h2 >= n) continue;
                } else {
                    h2 = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
                    if (h2 <= h1) continue;
                }
                c.a = value_at(static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m))), h1);
                c.b = value_at(static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m))), h2);
                return c;
            }
            case ClueKind::SameHouse: {
                if (m < 3) continue;
                const int a1 = 1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m - 1)));
                const int a2 = 1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m - 1)));
                if (a1 == a2) continue;
                const int h = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
                c.a = value_at(a1, h);
                c.b = value_at(a2, h);
                return c;
            }
            case ClueKind::AttributeOfPerson: {
                if (m < 2) continue;
                const int a2 = 1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m - 1)));
                const int h = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
                c.a = value_at(0, h);
                c.b = value_at(a2, h);
                return c;
            }
        }
    }
}

}  // namespace

GeneratedPuzzle gen_puzzle(std::uint64_t seed, int houses, int attributes) {
    if (houses < 2 || houses > 5) throw Error(Errc::PreconditionFailed, "houses must be between 2 and 5");
    if (attributes < 1 || attributes > 4) throw Error(Errc::PreconditionFailed, "attributes must be between 1 and 4");
    std::mt19937_64 rng(seed);

    GeneratedPuzzle out;
    out.id = "gen-" + std::to_string(seed) + "-" + std::to_string(houses) + "x" + std::to_string(attributes);
    out.schema.houses = houses;
    std::vector<std::size_t> pool_ids{1, 2, 3, 4, 5};
    shuffle(pool_ids, rng);
    pool_ids.resize(static_cast<std::size_t>(attributes - 1));
    std::sort(pool_ids.begin(), pool_ids.end());
    pool_ids.insert(pool_ids.begin(), 0);
    for (std::size_t id : pool_ids) {
        std::vector<std::string> values(kPools[id].values.begin(), kPools[id].values.end());
        shuffle(values, rng);
        values.resize(static_cast<std::size_t>(houses));
        std::sort(values.begin(), values.end());
        out.schema.attributes.push_back({kPools[id].name, values});
    }

    constexpr int kAttempts = 20;
    constexpr int kMaxClues = 60;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        Assignment sol(static_cast<std::size_t>(attributes));
        for (auto& row : sol) {
            row.resize(static_cast<std::size_t>(houses));
            std::iota(row.begin(), row.end(), 0);
            shuffle(row, rng);
        }
        std::vector<Clue> clues;
        std::size_t count = brute_solve(out.schema, clues, 2).size();
        for (int i = 0; i < kMaxClues * 4 && count > 1 && static_cast<int>(clues.size()) < kMaxClues; ++i) {
            Clue c = random_true_clue(sol, out.schema, rng);
            if (std::find(clues.begin(), clues.end(), c) != clues.end()) continue;
            clues.push_back(c);
            count = brute_solve(out.schema, clues, 2).size();
        }
        if (count != 1) continue;
        // Single greedy removal pass; removal only ever adds solutions, so a
        // clue kept here stays necessary for the final set.
        for (std::size_t i = clues.size(); i-- > 0;) {
            std::vector<Clue> trial = clues;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
            if (brute_solve(out.schema, trial, 2).size() == 1) clues = std::move(trial);
        }
        out.clues = std::move(clues);
        out.solution = std::move(sol);
        out.statement = puzzle_statement(out.schema, out.clues);
        return out;
    }
    throw Error(Errc::GenerationExhausted, "no unique puzzle for seed " + std::to_string(seed));
}

}  // namespace atomr
