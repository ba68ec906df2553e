#include "atomr/bench.hpp"
#include "atomr/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace atomr {
namespace {

Task mcq_task() {
    return task_from_json(nlohmann::json::parse(
        R"({"id":"m1","suite":"s","split":"easy","statement":"Pick one.","schema":{"type":"mcq","options":["x","y","z"]},"gold":"B"})"));
}

TEST(Tasks, LoadSortsGoodFromBad) {
    test::TempDir dir;
    const auto file = dir.path() / "t.jsonl";
    std::ofstream(file) << task_to_json(mcq_task()).dump() << "\n\n"
                        << "{not json\n"
                        << R"({"id":"m2","suite":"s","statement":"Pick.","schema":{"type":"mcq","options":["x"]},"gold":"C"})"
                        << "\n"
                        << R"({"id":"n1","suite":"s","statement":"Sum?","schema":{"type":"numeric"},"gold":"1/2"})"
                        << "\n";
    const auto set = load_tasks(file);
    ASSERT_EQ(set.tasks.size(), 2u);
    ASSERT_EQ(set.rejects.size(), 2u);
    EXPECT_EQ(set.rejects[0].line, 3u);
    EXPECT_EQ(set.rejects[0].reason, RejectReason::Malformed);
    EXPECT_EQ(set.rejects[1].line, 4u);
    EXPECT_EQ(set.rejects[1].reason, RejectReason::SchemaMismatch);

    const auto only = load_tasks(file, TaskFormat::Numeric);
    ASSERT_EQ(only.tasks.size(), 1u);
    EXPECT_EQ(only.tasks[0].id, "n1");

    std::ofstream(dir.path() / "empty.jsonl") << "\n";
    try {
        load_tasks(dir.path() / "empty.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptySuite);
    }
    EXPECT_THROW(load_tasks(dir.path() / "missing.jsonl"), Error);
}

TEST(Tasks, RoundTripAndCaseFixtures) {
    const auto suite = load_tasks(test::fixture("case_study.jsonl"));
    ASSERT_EQ(suite.tasks.size(), 2u);
    for (const auto& t : suite.tasks) {
        const auto back = task_from_json(task_to_json(t));
        EXPECT_EQ(task_to_json(back), task_to_json(t));
        EXPECT_EQ(back.clues, t.clues);
    }
    const auto& grid = suite.tasks[1];
    const auto gs = std::get<GridSchema>(grid.schema);
    const auto sols = brute_solve(gs, grid.clues, 2);
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(GridAnswer{to_grid(sols[0], gs)}, std::get<GridAnswer>(grid.gold));
}

TEST(Score, Formats) {
    const auto m = mcq_task();
    EXPECT_TRUE(score(m, "The correct answer is (B)").correct);
    EXPECT_EQ(score(m, "nothing").failure, VerdictFailure::NoAnswerFound);
    EXPECT_FALSE(score(m, "The correct answer is (A)").correct);

    auto n = m;
    n.schema = NumericSchema{};
    n.gold = TextAnswer{"0.5"};
    EXPECT_TRUE(score(n, "The answer is 1/2").correct);
    EXPECT_FALSE(score(n, "The answer is 0.51").correct);

    const auto grid = test::case_task(2);
    const std::string gold_text = format_answer(grid.gold);
    const auto full = score(grid, gold_text);
    EXPECT_TRUE(full.correct);
    EXPECT_DOUBLE_EQ(full.partial, 1.0);
}

TEST(Score, GridPartialCredit) {
    const auto task = puzzle_task(gen_puzzle(3, 3, 3));
    auto cells = std::get<GridAnswer>(task.gold).cells;
    const std::size_t total = cells.size() * cells[0].size();
    cells.back() = std::vector<std::optional<std::string>>(cells[0].size());
    const auto v = score(task, format_grid(cells));
    EXPECT_FALSE(v.correct);
    EXPECT_DOUBLE_EQ(v.partial, static_cast<double>(total - cells[0].size()) / static_cast<double>(total));
}

TEST(Aggregate, MeansBySplitAndTrial) {
    std::vector<TrialRecord> recs(4);
    recs[0] = {"a", 0, "easy", {true, 1.0}, "", 3, {1, 10, 2, 5}, {}, {}};
    recs[1] = {"a", 1, "easy", {false, 0.5}, "", 3, {1, 10, 2, 5}, {}, {}};
    recs[2] = {"b", 0, "hard", {false, 0.0, {}, VerdictFailure::BackendFailure}, "", 0, {}, "boom", {}};
    recs[3] = {"b", 1, "hard", {true, 1.0}, "", 2, {2, 1, 1, 1}, {}, {}};
    const auto a = aggregate(recs, 2);
    EXPECT_DOUBLE_EQ(a.overall, 0.5);
    EXPECT_DOUBLE_EQ(a.overall_partial, 0.625);
    EXPECT_DOUBLE_EQ(a.by_split.at("easy"), 0.5);
    EXPECT_DOUBLE_EQ(a.by_split.at("hard"), 0.5);
    EXPECT_EQ(a.by_trial, (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(a.usage, (Usage{4, 21, 5, 11}));
    EXPECT_EQ(a.failures, 1u);

    BenchReport r{"s", StrategyKind::SinglePass, 2, recs, a};
    EXPECT_TRUE(verify_aggregates(r));
    r.aggregates.overall = 0.75;
    EXPECT_FALSE(verify_aggregates(r));
}

std::vector<Task> generated(int n) {
    std::vector<Task> tasks;
    for (int s = 0; s < n; ++s) tasks.push_back(puzzle_task(gen_puzzle(100 + s, 3 + s % 2, 3)));
    return tasks;
}

TEST(Bench, OracleAtomicRunScoresFull) {
    const auto tasks = generated(6);
    const auto oracle = make_oracle_backend(tasks);
    BenchOptions opts;
    opts.trials = 2;
    opts.workers = 3;
    opts.keep_traces = true;
    const auto report = run_benchmark(tasks, Strategy{}, SessionBackends::all(*oracle), test::shipped_sops(), opts);
    ASSERT_EQ(report.records.size(), 12u);
    EXPECT_DOUBLE_EQ(report.aggregates.overall, 1.0);
    EXPECT_DOUBLE_EQ(report.aggregates.overall_partial, 1.0);
    EXPECT_TRUE(verify_aggregates(report));
    for (const auto& r : report.records) {
        ASSERT_TRUE(r.trace);
        EXPECT_TRUE(r.trace->termination);
        EXPECT_TRUE(r.trace->evaluation && r.trace->evaluation->correct);
    }
    EXPECT_EQ(report.records[0].task_id, tasks[0].id);
    EXPECT_EQ(report.records[1].trial, 1);
}

TEST(Bench, LossySinglePassScoresLower) {
    const auto tasks = generated(6);
    const auto lossy = make_oracle_backend(tasks, true);
    Strategy sp;
    sp.kind = StrategyKind::SinglePass;
    BenchOptions opts;
    opts.trials = 1;
    const auto report = run_benchmark(tasks, sp, SessionBackends::all(*lossy), test::shipped_sops(), opts);
    EXPECT_DOUBLE_EQ(report.aggregates.overall, 0.0);
    EXPECT_GT(report.aggregates.overall_partial, 0.5);
    EXPECT_LT(report.aggregates.overall_partial, 1.0);
}

TEST(Bench, BackendFailuresAreRecorded) {
    const auto tasks = generated(2);
    CallbackBackend down([](const CompletionRequest&) -> std::string {
        throw BackendError(BackendErrorKind::Transport, "refused");
    });
    for (StrategyKind k : {StrategyKind::AtomicReasoner, StrategyKind::SinglePass}) {
        Strategy s;
        s.kind = k;
        BenchOptions opts;
        opts.trials = 1;
        const auto report = run_benchmark(tasks, s, SessionBackends::all(down), test::shipped_sops(), opts);
        EXPECT_EQ(report.aggregates.failures, 2u);
        for (const auto& r : report.records) {
            EXPECT_EQ(r.verdict.failure, VerdictFailure::BackendFailure);
            EXPECT_TRUE(r.error);
        }
    }
}

TEST(Bench, ReportRoundTrip) {
    const auto tasks = generated(3);
    const auto oracle = make_oracle_backend(tasks, true);
    BenchOptions opts;
    opts.trials = 2;
    const auto report = run_benchmark(tasks, Strategy{}, SessionBackends::all(*oracle), test::shipped_sops(), opts);
    const auto doc = report_to_json(report);
    const auto back = report_from_json(doc);
    EXPECT_EQ(report_to_json(back), doc);
    EXPECT_EQ(back.aggregates, report.aggregates);
    EXPECT_TRUE(verify_aggregates(back));
    EXPECT_EQ(doc["strategy"], "ar");
}

TEST(Bench, EmptySuiteRejected) {
    ScriptedBackend b;
    EXPECT_THROW(run_benchmark({}, Strategy{}, SessionBackends::all(b), test::shipped_sops()), Error);
}

}  // namespace
}  // namespace atomr
