#pragma once

#include "atomr/tree.hpp"

#include <random>
#include <string>

namespace atomr::test {

inline std::string random_text(std::mt19937_64& rng, bool allow_empty = false) {
    static const char* words[] = {"alpha", "beta", "ünïcode", "line\nbreak", "quote\"d", "tab\there", "{{x}}",
                                  "Hypothesis 1:", "Check Result:", "∫ dx", "0.5", ""};
    std::uniform_int_distribution<int> n(allow_empty ? 0 : 1, 5);
    std::uniform_int_distribution<std::size_t> w(0, std::size(words) - 2);
    std::string out;
    const int k = n(rng);
    for (int i = 0; i < k; ++i) out += (i ? " " : "") + std::string(words[w(rng)]);
    return out;
}

inline Problem random_problem(std::mt19937_64& rng) {
    Problem p;
    p.id = "p" + std::to_string(rng() % 1000);
    p.statement = random_text(rng);
    if (rng() % 2) p.domain_hint = "logical-reasoning";
    switch (rng() % 4) {
        case 0: p.schema = FreeTextSchema{}; break;
        case 1: p.schema = MultipleChoiceSchema{{"one", "two", "three"}}; break;
        case 2: p.schema = GridSchema{2, {{"Name", {"A", "B"}}, {"Color", {"red", "blue"}}}}; break;
        default: p.schema = NumericSchema{}; break;
    }
    return p;
}

inline CheckReport random_report(std::mt19937_64& rng) {
    CheckReport r;
    r.verdict = rng() % 2 ? Verdict::Error : Verdict::NoError;
    if (r.verdict == Verdict::Error) {
        r.kinds.push_back(kAllErrorKinds[rng() % kErrorKindCount]);
        if (rng() % 2) r.suggestion = random_text(rng);
    }
    r.rationale = random_text(rng, true);
    return r;
}

/// A valid tree grown through the public API with random legal operations.
inline AtomicTree random_tree(std::mt19937_64& rng, int ops = 20) {
    AtomicTree t(random_problem(rng));
    for (int i = 0; i < ops; ++i) {
        const auto path = t.active_path();
        switch (rng() % 8) {
            case 0:
            case 1:
            case 2: {
                Action a = kAllActions[rng() % kActionCount];
                if (a == Action::HypothesisVerification && !t.has_on_active_path(Action::HypothesisGeneration)) {
                    a = Action::HypothesisGeneration;
                }
                t.append_node(a, random_text(rng, true), random_text(rng));
                break;
            }
            case 3:
                if (!path.empty()) {
                    const ChainId left = t.active_chain_id();
                    t.branch_at(path[rng() % path.size()], rng() % 2 ? ChainStatus::Suspended : ChainStatus::Dormant);
                    if (rng() % 2) t.set_summary(left, random_text(rng));
                }
                break;
            case 4:
                if (!path.empty()) t.record_check(path[rng() % path.size()], random_report(rng));
                break;
            case 5:
                if (!path.empty()) t.revise_content(path[rng() % path.size()], random_text(rng));
                break;
            case 6: t.add_event(random_text(rng), random_text(rng, true)); break;
            default:
                t.add_usage(static_cast<std::int64_t>(rng() % 500), static_cast<std::int64_t>(rng() % 500),
                            static_cast<std::int64_t>(rng() % 50));
                break;
        }
    }
    if (rng() % 3 == 0) {
        for (const auto& [id, c] : t.chains()) {
            if (c.status == ChainStatus::Dormant) {
                t.reactivate(id);
                break;
            }
        }
    }
    if (rng() % 2) {
        t.set_termination(rng() % 2 ? TerminationMode::ActiveSolved : TerminationMode::PassiveLimit, random_text(rng));
    }
    if (rng() % 2) t.set_evaluation(Evaluation{"suite", rng() % 2 == 0, static_cast<double>(rng() % 7) / 7.0});
    return t;
}

}  // namespace atomr::test
