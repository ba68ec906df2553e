#include "atomr/bench.hpp"
#include "atomr/cache_backend.hpp"
#include "atomr/checker.hpp"
#include "atomr/http_backend.hpp"
#include "atomr/metrics.hpp"
#include "atomr/router.hpp"
#include "unit/adversarial.hpp"
#include "unit/checker_corpus.hpp"
#include "unit/invariants.hpp"
#include "unit/naive_grid.hpp"
#include "unit/random_tree.hpp"
#include "unit/stub_server.hpp"
#include "unit/support.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace atomr::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

/// Thrown by require(); the message becomes the FAIL detail.
struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failed(what);
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

// ---- 1 ----

std::string structural_properties() {
    const auto start = Clock::now();
    std::mt19937_64 rng(7);
    std::size_t ops_total = 0;
    for (int seq = 0; seq < 1000; ++seq) {
        AtomicTree t(Problem{"p", "statement " + std::to_string(seq), std::nullopt, FreeTextSchema{}});
        const int ops = 5 + static_cast<int>(rng() % 40);
        for (int i = 0; i < ops; ++i, ++ops_total) {
            const auto path = t.active_path();
            const std::size_t before = t.round_count();
            bool appended = false;
            try {
                switch (rng() % 7) {
                    case 0:
                    case 1:
                        t.append_node(kAllActions[rng() % kActionCount], "g", "content");
                        appended = true;
                        break;
                    case 2:
                        if (t.round_count() > 0) {
                            t.branch_at(NodeId{static_cast<std::uint32_t>(1 + rng() % t.round_count())},
                                        rng() % 2 ? ChainStatus::Suspended : ChainStatus::Dormant);
                        }
                        break;
                    case 3: t.reactivate(ChainId{static_cast<std::uint32_t>(1 + rng() % t.chains().size())}); break;
                    case 4:
                        t.set_summary(ChainId{static_cast<std::uint32_t>(1 + rng() % t.chains().size())}, "s");
                        break;
                    case 5:
                        if (!path.empty()) t.revise_content(path[rng() % path.size()], "revised");
                        break;
                    default:
                        if (rng() % 10 == 0) t.set_termination(TerminationMode::PassiveLimit, "final");
                        break;
                }
            } catch (const Error&) {
            }
            require(t.round_count() == before + (appended ? 1 : 0),
                    "round accounting broke in sequence " + std::to_string(seq));
            if (auto problem = test::structural_problem(t)) {
                throw Failed("sequence " + std::to_string(seq) + ": " + *problem);
            }
        }
    }
    const double secs = seconds_since(start);
    require(secs < 10.0, "took " + fmt(secs, 1) + " s");
    return "1000 sequences, " + std::to_string(ops_total) + " operations, " + fmt(secs, 2) + " s";
}

// ---- 2 ----

std::string router_rules() {
    const auto& sops = test::shipped_sops();
    for (int i = 0; i < test::kAdversarialCases; ++i) {
        const auto violation = test::run_adversarial(i, sops);
        require(violation.empty(), "case " + std::to_string(i) + ": " + violation);
    }

    // Default config: the round cap is 12 even when the backend never finishes.
    require(SessionConfig{}.router.max_rounds == 12, "default round cap is not 12");
    CallbackBackend endless(
        [](const CompletionRequest& r) -> std::string {
            if (r.tag == tags::kRouting) return "ACTION: PREMISE_RETRIEVAL";
            if (r.tag == tags::kCheck) return "Check Result: No error";
            return "Answer: 4";
        },
        "endless");
    const auto capped = run_session(Problem{"p", "What is 2 + 2?", std::nullopt, NumericSchema{}}, SessionConfig{},
                                    SessionBackends::all(endless), sops);
    require(capped.tree.round_count() == 12, "endless session ran " + std::to_string(capped.tree.round_count()));
    require(capped.tree.termination()->mode == TerminationMode::PassiveLimit, "endless session not passive");

    // First finish on an unverified path becomes a verification.
    AtomicTree t(Problem{"p", "Order the birds.", std::nullopt, FreeTextSchema{}});
    t.append_node(Action::PremiseDiscovery, "", "clues");
    t.append_node(Action::HypothesisGeneration, "", "Hypothesis 1: x");
    t.append_node(Action::HypothesisVerification, "", "holds");
    const NodeId g2 = t.append_node(Action::HypothesisGeneration, "", "Hypothesis 2: y");
    t.branch_at(g2);
    ScriptedBackend finish;
    finish.push("routing", "ACTION: SUMMARY<FINISHED>");
    const auto d = decide(t, RouterConfig{}, finish);
    require(std::holds_alternative<Extend>(d) && std::get<Extend>(d).action == Action::HypothesisVerification,
            "unverified finish was not converted");

    // Unparseable twice falls back to premise summarization.
    AtomicTree g(Problem{"p", "Order the birds.", std::nullopt, FreeTextSchema{}});
    g.append_node(Action::PremiseDiscovery, "", "clues");
    ScriptedBackend garbage;
    garbage.push("routing", "?");
    garbage.push("routing", "??");
    const auto fb = decide(g, RouterConfig{}, garbage);
    require(std::holds_alternative<Extend>(fb) && std::get<Extend>(fb).action == Action::PremiseSummarization,
            "garbage did not fall back");
    return std::to_string(test::kAdversarialCases) + " adversarial cases, 12-round cap, forced verification";
}

// ---- 3 ----

SessionResult replay(int n, SessionConfig cfg) {
    auto b = ScriptedBackend::load(test::fixture("case" + std::to_string(n) + "_script.json"));
    return run_session(test::case_task(n).problem(), cfg, SessionBackends::all(*b), test::shipped_sops());
}

std::string transcript_replays() {
    SessionConfig one;
    one.router.backtrack_after_summary = false;
    const auto r1 = replay(1, one);
    require(!r1.failure, "case 1 failed: " + r1.failure.value_or(""));
    require(score(test::case_task(1), r1.answer.text).correct, "case 1 answer is not (A)");
    require(r1.answer.text.find("(A)") != std::string::npos, "case 1 answer text lacks (A)");
    int errors = 0, revisions = 0;
    for (const auto& [id, node] : r1.tree.nodes()) {
        revisions += node.revisions;
        for (const auto& rep : node.check_reports) {
            if (rep.verdict != Verdict::Error) continue;
            ++errors;
            require(rep.kinds == std::vector<ErrorKind>{ErrorKind::SortingError}, "case 1 error kind");
            require(rep.rationale.find("Check Result: There is an error.") != std::string::npos,
                    "case 1 error rationale");
        }
    }
    require(errors == 1, "case 1 has " + std::to_string(errors) + " error verdicts");
    require(revisions == 1, "case 1 has " + std::to_string(revisions) + " revisions");

    const auto r2 = replay(2, SessionConfig{});
    require(!r2.failure, "case 2 failed: " + r2.failure.value_or(""));
    const auto v2 = score(test::case_task(2), r2.answer.text);
    require(v2.correct && v2.partial == 1.0, "case 2 grid scored " + fmt(v2.partial));
    require(r2.tree.chains().size() == 2, "case 2 did not backtrack");
    return "case 1 (A) with one sorting error and one revision; case 2 grid 100%";
}

// ---- 4 ----

std::string oracle_equivalence() {
    const auto start = Clock::now();
    std::vector<Task> tasks;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const GeneratedPuzzle p = gen_puzzle(seed, 3 + static_cast<int>(seed % 2), 3);
        std::vector<std::vector<int>> found;
        require(test::naive_count(p.schema, p.clues, &found) == 1, "seed " + std::to_string(seed) + " not unique");
        require(found == p.solution, "seed " + std::to_string(seed) + " gold differs from enumeration");
        tasks.push_back(puzzle_task(p));
    }
    const auto& sops = test::shipped_sops();
    BenchOptions opts;
    opts.trials = 3;
    const auto oracle = make_oracle_backend(tasks);
    const auto ar = run_benchmark(tasks, Strategy{}, SessionBackends::all(*oracle), sops, opts);
    require(verify_aggregates(ar), "AR aggregates do not recompute");
    require(ar.aggregates.overall == 1.0, "AR oracle mean " + fmt(ar.aggregates.overall));

    Strategy sp;
    sp.kind = StrategyKind::SinglePass;
    const auto lossy = make_oracle_backend(tasks, true);
    const auto base = run_benchmark(tasks, sp, SessionBackends::all(*lossy), sops, opts);
    require(base.aggregates.overall < ar.aggregates.overall, "lossy baseline not lower");
    const double secs = seconds_since(start);
    require(secs < 60.0, "took " + fmt(secs, 1) + " s");
    return "200 unique puzzles; AR " + fmt(ar.aggregates.overall) + " vs lossy single-pass " +
           fmt(base.aggregates.overall) + " (partial " + fmt(base.aggregates.overall_partial) + "), " +
           fmt(secs, 1) + " s";
}

// ---- 5 ----

std::string checker_taxonomy() {
    std::map<ActionCategory, std::set<ErrorKind>> by_category;
    for (Action a : kAllActions) {
        const auto kinds = applicable_errors(a);
        auto& slot = by_category[category(a)];
        if (!slot.empty()) require(std::set<ErrorKind>(kinds.begin(), kinds.end()) == slot, "category mismatch");
        slot.insert(kinds.begin(), kinds.end());
    }
    require(by_category[ActionCategory::Premise].size() == 3, "premise kinds");
    require(by_category[ActionCategory::Reasoning].size() == 6, "reasoning kinds");
    require(by_category[ActionCategory::Ending].size() == 4, "ending kinds");
    std::set<ErrorKind> all;
    for (const auto& [c, kinds] : by_category) all.insert(kinds.begin(), kinds.end());
    require(all.size() == kErrorKindCount, "kinds overlap or are missing");

    const auto corpus = test::load_json(test::fixture("checker_corpus.json"));
    require(corpus.size() == 20, "corpus has " + std::to_string(corpus.size()) + " items");
    for (const auto& item : corpus) {
        if (auto m = test::corpus_mismatch(item)) throw Failed(*m);
    }

    AtomicTree t(Problem{"p", "Order the birds.", std::nullopt, FreeTextSchema{}});
    const NodeId n = t.append_node(Action::PremiseDiscovery, "", "Clue 1 says the owl is third.");
    CallbackBackend stubborn([](const CompletionRequest& r) -> std::string {
        if (r.tag == tags::kCheck) return "Check Result: There is an error.\nError Types: Content Conflict";
        return "Clue 1: owl at position 3.";
    });
    const auto out = review_node(t, n, stubborn, stubborn);
    require(out.revisions <= 2 && t.node(n).revisions <= 2, "revision cap exceeded");
    require(out.flagged, "capped node not flagged");
    return "13 kinds as 3/6/4, corpus 20/20, revisions capped at " + std::to_string(out.revisions);
}

// ---- 6 ----

std::string entropy_diagnostics() {
    for (std::size_t k : {2u, 4u, 8u}) {
        const double h = entropy(std::vector<double>(k, 1.0 / static_cast<double>(k)));
        require(std::abs(h - std::log2(static_cast<double>(k))) <= 1e-12, "uniform k=" + std::to_string(k));
    }
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto distribution = [&](std::size_t k) {
        std::vector<double> p(k);
        double s = 0;
        for (auto& x : p) s += x = u(rng) + 1e-9;
        for (auto& x : p) x /= s;
        return p;
    };
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 1 + rng() % kActionCount;
        const auto r = distribution(k);
        std::vector<double> e(k);
        for (auto& x : e) x = 3.0 * u(rng);
        long double dot = 0;
        for (std::size_t j = 0; j < k; ++j) dot += static_cast<long double>(r[j]) * e[j];
        worst = std::max(worst, std::abs(weighted_step_entropy(r, e) - static_cast<double>(dot)));
    }
    require(worst <= 1e-12, "dot-product deviation " + std::to_string(worst));
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 1 + rng() % kActionCount;
        const auto r = distribution(k);
        std::vector<double> lo(k), hi(k);
        for (std::size_t j = 0; j < k; ++j) {
            lo[j] = 3.0 * u(rng);
            hi[j] = lo[j] + (rng() % 2 ? u(rng) : 0.0);
        }
        require(weighted_step_entropy(r, lo) <= weighted_step_entropy(r, hi) + 1e-12, "monotonicity pair " + std::to_string(i));
    }
    std::ostringstream w;
    w << std::scientific << std::setprecision(1) << worst;
    return "log2 k exact, 1000 dot products (max deviation " + w.str() + "), 1000 monotone pairs";
}

// ---- 7 ----

std::string serialization() {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 500; ++i) {
        const auto t = test::random_tree(rng, 5 + static_cast<int>(rng() % 30));
        const std::string doc = serialize_trace(t);
        const auto back = deserialize_trace(doc);
        require(back == t && serialize_trace(back) == doc, "round trip failed on tree " + std::to_string(i));
    }
    const AtomicTree case1 = load_trace(test::fixture("case1_trace.json"));
    const auto recs = to_sft_records({case1.state()});
    require(recs.size() == 1, "case 1 trace gave " + std::to_string(recs.size()) + " SFT records");
    require(recs[0].answer.find("(A)") != std::string::npos, "SFT answer lacks (A)");
    bool revised = false;
    for (const auto& [id, n] : case1.nodes()) {
        if (!n.revised()) continue;
        revised = true;
        require(n.action == Action::HypothesisVerification, "revised node is not a verification");
        require(recs[0].reasoning.find(n.content) != std::string::npos, "SFT reasoning lacks the revised text");
    }
    require(revised, "case 1 trace has no revised node");
    return "500 random trees, case 1 SFT record with revised verification and (A)";
}

// ---- 8 ----

struct HttpOutcome {
    std::optional<std::string> text;
    std::optional<BackendErrorKind> error;
    int attempts = 0;
    std::vector<std::chrono::milliseconds> slept;
};

HttpOutcome call_stub(const std::vector<std::string>& plan, int max_retries) {
    test::StubServer stub(plan);
    HttpConfig c;
    c.base_url = stub.url();
    c.model = "stub";
    c.api_key_env = "ATOMR_ACCEPTANCE_UNSET_KEY";
    c.timeout = 300ms;
    c.retry.max_retries = max_retries;
    HttpOutcome out;
    HttpBackend b(c, [&](std::chrono::milliseconds d) { out.slept.push_back(d); }, [] { return 0.5; });
    CompletionRequest req;
    req.messages = {{Role::User, "ping"}};
    try {
        out.text = b.complete(req).text;
    } catch (const BackendError& e) {
        out.error = e.kind();
    }
    out.attempts = HttpBackend::last_attempts();
    return out;
}

std::string backend_robustness() {
    const auto recovered = call_stub({"429", "500", "timeout", "ok"}, 5);
    require(recovered.text == "stub reply", "transient sequence did not recover");
    require(recovered.attempts == 4, "attempts " + std::to_string(recovered.attempts));
    require(recovered.slept == std::vector<std::chrono::milliseconds>{1000ms, 2000ms, 4000ms}, "backoff schedule");

    const auto malformed = call_stub({"malformed", "ok"}, 5);
    require(malformed.error == BackendErrorKind::Malformed && malformed.attempts == 1, "malformed not final");
    const auto exhausted = call_stub({"500", "500", "500", "ok"}, 2);
    require(exhausted.error == BackendErrorKind::Server && exhausted.attempts == 3, "server budget");
    const auto slow = call_stub({"timeout", "ok"}, 0);
    require(slow.error == BackendErrorKind::Timeout, "timeout classification");
    const auto rate = call_stub({"429", "429", "ok"}, 1);
    require(rate.error == BackendErrorKind::RateLimited && rate.attempts == 2, "rate-limit classification");
    const auto auth = call_stub({"401", "ok"}, 5);
    require(auth.error == BackendErrorKind::Auth && auth.attempts == 1, "auth classification");

    test::TempDir dir;
    SessionConfig cfg;
    cfg.router.backtrack_after_summary = false;
    const Problem problem = test::case_task(1).problem();
    auto script = std::shared_ptr<Backend>(ScriptedBackend::load(test::fixture("case1_script.json")));
    CachingBackend recorder(script, CacheOptions{CacheMode::Record, dir.path(), true, ""});
    const auto recorded = run_session(problem, cfg, SessionBackends::all(recorder), test::shipped_sops());
    CachingBackend replayer(nullptr, CacheOptions{CacheMode::Replay, dir.path(), true, script->model()});
    const auto replayed = run_session(problem, cfg, SessionBackends::all(replayer), test::shipped_sops());
    require(!recorded.failure && !replayed.failure, "record or replay failed");
    require(serialize_trace(recorded.tree) == serialize_trace(replayed.tree), "replayed trace differs");
    return "stub sequences classified per contract; record/replay byte-identical";
}

// ---- 9 ----

std::optional<std::string> live_smoke() {
    const char* base = std::getenv("ATOMR_LIVE_BASE_URL");
    const char* model = std::getenv("ATOMR_LIVE_MODEL");
    const char* key_env = std::getenv("ATOMR_LIVE_API_KEY_ENV");
    const std::string key_name = key_env ? key_env : "OPENAI_API_KEY";
    if (!base || !model || !std::getenv(key_name.c_str())) return std::nullopt;

    std::vector<Task> tasks;
    for (std::uint64_t seed = 1000; seed < 1010; ++seed) tasks.push_back(puzzle_task(gen_puzzle(seed, 3, 3), "live"));
    HttpConfig c;
    c.base_url = base;
    c.model = model;
    c.api_key_env = key_name;
    HttpBackend backend(c);
    BenchOptions opts;
    opts.trials = 3;
    const auto ar = run_benchmark(tasks, Strategy{}, SessionBackends::all(backend), test::shipped_sops(), opts);
    Strategy sp;
    sp.kind = StrategyKind::SinglePass;
    const auto base_run = run_benchmark(tasks, sp, SessionBackends::all(backend), test::shipped_sops(), opts);
    require(ar.aggregates.overall >= base_run.aggregates.overall,
            "AR " + fmt(ar.aggregates.overall) + " < single-pass " + fmt(base_run.aggregates.overall));
    return "AR " + fmt(ar.aggregates.overall) + " >= single-pass " + fmt(base_run.aggregates.overall);
}

bool report(int id, const std::string& name, const std::function<std::string()>& body) {
    try {
        const std::string detail = body();
        std::cout << "PASS " << id << " " << name << ": " << detail << std::endl;
        return true;
    } catch (const std::exception& e) {
        std::cout << "FAIL " << id << " " << name << ": " << e.what() << std::endl;
        return false;
    }
}

}  // namespace
}  // namespace atomr::acceptance

int main() {
    using namespace atomr::acceptance;
    bool ok = true;
    ok &= report(1, "structural properties", structural_properties);
    ok &= report(2, "router rules", router_rules);
    ok &= report(3, "transcript replays", transcript_replays);
    ok &= report(4, "oracle equivalence", oracle_equivalence);
    ok &= report(5, "checker taxonomy", checker_taxonomy);
    ok &= report(6, "entropy diagnostics", entropy_diagnostics);
    ok &= report(7, "serialization", serialization);
    ok &= report(8, "backend robustness", backend_robustness);
    try {
        if (auto detail = live_smoke()) {
            std::cout << "PASS 9 live smoke (non-gating): " << *detail << std::endl;
        } else {
            std::cout << "SKIP 9 live smoke (non-gating): set ATOMR_LIVE_BASE_URL, ATOMR_LIVE_MODEL and the key "
                         "variable (ATOMR_LIVE_API_KEY_ENV, default OPENAI_API_KEY)"
                      << std::endl;
        }
    } catch (const std::exception& e) {
        std::cout << "FAIL 9 live smoke (non-gating): " << e.what() << std::endl;
    }
    return ok ? 0 : 1;
}
