#pragma once

#include "atomr/answers.hpp"
#include "atomr/backend.hpp"
#include "atomr/puzzle.hpp"
#include "atomr/router.hpp"
#include "atomr/tree.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace atomr {

struct Task {
    std::string id;
    std::string statement;
    AnswerSchema schema;
    Answer gold;
    std::optional<std::string> split;
    std::string suite;
    std::optional<std::string> domain_hint;
    /// Structured clues for grid tasks; enables the brute-force oracle.
    std::vector<Clue> clues;

    Problem problem() const { return Problem{id, statement, domain_hint, schema}; }
};

enum class TaskFormat { Mcq, Grid, Numeric, FreeText };

std::string_view to_string(TaskFormat f) noexcept;
std::optional<TaskFormat> try_parse_task_format(std::string_view text);

enum class RejectReason { Malformed, SchemaMismatch };

std::string_view to_string(RejectReason r) noexcept;

struct Reject {
    std::size_t line = 0;  // one-based
    RejectReason reason = RejectReason::Malformed;
    std::string detail;
};

struct TaskSet {
    std::vector<Task> tasks;
    std::vector<Reject> rejects;
};

/// Throws ParseError or Error(SchemaMismatch-style InvalidProblem) for one record.
Task task_from_json(const nlohmann::json& record);
/// Problem part of a task record; "gold" is ignored and "schema" defaults to free text.
Problem problem_from_json(const nlohmann::json& record);
AnswerSchema schema_from_json(const nlohmann::json& schema);
nlohmann::json task_to_json(const Task& task);

/// One JSON record per line; blank lines are skipped. Bad records go to
/// `rejects`. When `only` is set, records of other formats are rejected as
/// SchemaMismatch. Throws Error(Io) when unreadable, Error(EmptySuite) when
/// no record is valid.
TaskSet load_tasks(const std::filesystem::path& path, std::optional<TaskFormat> only = std::nullopt);

void write_tasks(const std::filesystem::path& path, const std::vector<Task>& tasks);

/// Generated puzzle as a bench task with its gold grid.
Task puzzle_task(const GeneratedPuzzle& puzzle, std::string suite = "generated");

enum class VerdictFailure { NoAnswerFound, SchemaMismatch, BackendFailure };

std::string_view to_string(VerdictFailure f) noexcept;

struct TaskVerdict {
    bool correct = false;
    double partial = 0.0;
    std::optional<Answer> extracted;
    std::optional<VerdictFailure> failure;
};

/// MCQ: letter match. Grid: fraction of gold cells matched exactly, missing
/// counts as wrong. Numeric: exact rational comparison after normalization.
/// Free text: normalized string equality.
TaskVerdict score(const Task& task, std::string_view final_text);

enum class StrategyKind { AtomicReasoner, SinglePass };

std::string_view to_string(StrategyKind k) noexcept;
std::optional<StrategyKind> try_parse_strategy(std::string_view text);

struct Strategy {
    StrategyKind kind = StrategyKind::AtomicReasoner;
    SessionConfig session;
    double single_pass_temperature = 0.7;
    int single_pass_max_tokens = 2048;
};

struct TrialRecord {
    std::string task_id;
    int trial = 0;
    std::optional<std::string> split;
    TaskVerdict verdict;
    std::string final_text;
    std::size_t rounds = 0;
    Usage usage;
    std::optional<std::string> error;
    /// Terminated or partial trace; kept only when BenchOptions::keep_traces.
    std::optional<TreeState> trace;
};

struct Aggregates {
    double overall = 0.0;
    double overall_partial = 0.0;
    std::map<std::string, double> by_split;
    std::vector<double> by_trial;
    Usage usage;
    std::size_t failures = 0;
    bool operator==(const Aggregates&) const = default;
};

struct BenchReport {
    std::string suite;
    StrategyKind strategy = StrategyKind::AtomicReasoner;
    int trials = 1;
    std::vector<TrialRecord> records;
    Aggregates aggregates;
};

struct BenchOptions {
    int trials = 3;
    /// 0 selects min(8, hardware threads).
    int workers = 0;
    bool keep_traces = false;
    /// Called from worker threads after every trial; must be thread-safe.
    std::function<void(const Task&, const TrialRecord&)> on_trial;
};

int default_workers() noexcept;

/// Arithmetic means over the records: success, partial credit, per split
/// and per trial index; usage totals.
Aggregates aggregate(const std::vector<TrialRecord>& records, int trials);

bool verify_aggregates(const BenchReport& report);

/// Tasks run in parallel across workers; a task's trials run in order.
/// Backend failures are recorded as BackendFailure verdicts.
BenchReport run_benchmark(const std::vector<Task>& tasks, const Strategy& strategy, const SessionBackends& backends,
                          const SopRegistry& sops, const BenchOptions& options = {});

/// One solve call with the bare problem.
FinalAnswer single_pass(const Problem& problem, Backend& backend, double temperature = 0.7, int max_tokens = 2048,
                        Usage* usage = nullptr, const PromptCatalog& catalog = PromptCatalog::defaults());

nlohmann::json report_to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& doc);

/// Backend that knows every task's gold answer and plays a well-behaved
/// model: routes through discovery, hypothesis, verification and summary,
/// never reports checker errors, and answers in the schema's format. With
/// `lossy`, every answer it gives drops the last house of a grid (or picks
/// a wrong option / value). Requests are matched to tasks by statement text.
std::unique_ptr<Backend> make_oracle_backend(std::vector<Task> tasks, bool lossy = false);

}  // namespace atomr
