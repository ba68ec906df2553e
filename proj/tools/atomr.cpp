#include "atomr/bench.hpp"
#include "atomr/cache_backend.hpp"
#include "atomr/error.hpp"
#include "atomr/http_backend.hpp"
#include "atomr/metrics.hpp"
#include "atomr/render.hpp"
#include "atomr/router.hpp"
#include "atomr/scripted_backend.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace atomr::cli {

enum Exit { kOk = 0, kUsage = 1, kBackend = 2, kIo = 3 };

#ifndef ATOMR_DEFAULT_SOP_DIR
#define ATOMR_DEFAULT_SOP_DIR "data/sops"
#endif

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string backend = "http";
    std::string script;
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_s = 120;
    int max_retries = 5;
    int max_concurrency = 4;
    double rps = 0;
    bool lossy = false;

    std::string cache = "off";
    std::string cache_dir = ".atomr-cache";

    int max_rounds = 12;
    int max_chains = 4;
    bool backtrack_after_summary = true;
    bool force_verify = true;
    std::string checker = "every";
    int max_revisions = 2;
    std::optional<std::int64_t> seed;
    bool triage_with_backend = true;

    std::string sop_dir = ATOMR_DEFAULT_SOP_DIR;
    std::string prompt_dir;
    std::string out = "runs";
    std::string run_name;
    bool verbose = false;
};

SessionConfig session_config(const RunConfig& rc) {
    SessionConfig s;
    s.router.max_rounds = rc.max_rounds;
    s.router.max_chains = rc.max_chains;
    s.router.backtrack_after_summary = rc.backtrack_after_summary;
    s.router.force_verify_on_first_finish = rc.force_verify;
    s.router.seed = rc.seed;
    auto mode = try_parse_checker_mode(rc.checker);
    if (!mode) throw UsageError("unknown checker mode '" + rc.checker + "'");
    s.checker.mode = *mode;
    s.checker.max_revisions = rc.max_revisions;
    s.checker.seed = rc.seed;
    s.executor.seed = rc.seed;
    s.triage_with_backend = rc.triage_with_backend;
    try {
        s.router.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return s;
}

/// Backend stack selected by the flags. `tasks` feeds the oracle backend.
std::shared_ptr<Backend> make_backend(const RunConfig& rc, const std::vector<Task>& tasks) {
    auto cache = try_parse_cache_mode(rc.cache);
    if (!cache) throw UsageError("unknown cache mode '" + rc.cache + "'");

    if (rc.backend == "replay") {
        if (rc.model.empty()) throw UsageError("--backend replay needs --model");
        return std::make_shared<CachingBackend>(nullptr,
                                                CacheOptions{CacheMode::Replay, rc.cache_dir, true, rc.model});
    }

    std::shared_ptr<Backend> inner;
    if (rc.backend == "http") {
        HttpConfig h;
        h.base_url = rc.base_url;
        h.model = rc.model;
        h.api_key_env = rc.api_key_env;
        h.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(rc.timeout_s * 1000));
        h.retry.max_retries = rc.max_retries;
        h.max_concurrency = rc.max_concurrency;
        h.requests_per_second = rc.rps;
        try {
            inner = std::make_shared<HttpBackend>(h);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    } else if (rc.backend == "scripted") {
        if (rc.script.empty()) throw UsageError("--backend scripted needs --script");
        inner = std::shared_ptr<Backend>(ScriptedBackend::load(rc.script));
    } else if (rc.backend == "oracle") {
        if (tasks.empty()) throw UsageError("--backend oracle needs tasks with gold answers");
        inner = std::shared_ptr<Backend>(make_oracle_backend(tasks, rc.lossy));
    } else {
        throw UsageError("unknown backend '" + rc.backend + "'");
    }

    if (*cache == CacheMode::Passthrough) return inner;
    return std::make_shared<CachingBackend>(inner, CacheOptions{*cache, rc.cache_dir, true, ""});
}

SopRegistry load_registry(const RunConfig& rc) {
    if (rc.sop_dir.empty() || rc.sop_dir == "none") return SopRegistry::minimal();
    auto r = load_sops(rc.sop_dir);
    for (const auto& w : r.warnings()) std::cerr << "warning: " << w << "\n";
    return r;
}

PromptCatalog load_catalog(const RunConfig& rc) {
    return rc.prompt_dir.empty() ? PromptCatalog::defaults() : PromptCatalog::load_dir(rc.prompt_dir);
}

std::string utc_stamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return ss.str();
}

fs::path make_run_dir(const RunConfig& rc, const std::string& cmd) {
    const std::string base = rc.run_name.empty() ? utc_stamp() + "-" + cmd : rc.run_name;
    fs::path dir = fs::path(rc.out) / base;
    for (int i = 2; rc.run_name.empty() && fs::exists(dir); ++i) dir = fs::path(rc.out) / (base + "-" + std::to_string(i));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Error(Errc::Io, "cannot write " + path.string());
}

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- solve ----

struct SolveArgs {
    std::string problem;
    bool stdin_input = false;
    std::string task_id;
};

/// A task when the record carries gold, otherwise a bare problem.
std::pair<Problem, std::optional<Task>> read_problem(const SolveArgs& a) {
    std::string text;
    std::string source;
    if (a.stdin_input) {
        text = read_stream(std::cin);
        source = "<stdin>";
    } else {
        std::ifstream in(a.problem, std::ios::binary);
        if (!in) throw Error(Errc::Io, "cannot read " + a.problem);
        text = read_stream(in);
        source = a.problem;
    }
    auto doc = json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
        if (doc.contains("gold")) {
            Task t = task_from_json(doc);
            return {t.problem(), t};
        }
        return {problem_from_json(doc), std::nullopt};
    }
    if (!a.stdin_input && fs::path(a.problem).extension() == ".jsonl") {
        const auto set = load_tasks(a.problem);
        for (const auto& t : set.tasks) {
            if (a.task_id.empty() || t.id == a.task_id) return {t.problem(), t};
        }
        throw UsageError("no task '" + a.task_id + "' in " + a.problem);
    }
    if (!a.stdin_input) throw ParseError(source, "expected a JSON problem record");
    Problem p{"stdin", text, std::nullopt, FreeTextSchema{}};
    validate(p);
    return {p, std::nullopt};
}

int cmd_solve(const RunConfig& rc, const SolveArgs& a) {
    if (a.stdin_input == !a.problem.empty()) throw UsageError("give a problem file or --stdin");
    auto [problem, task] = read_problem(a);
    const SessionConfig cfg = session_config(rc);
    const auto backend = make_backend(rc, task ? std::vector<Task>{*task} : std::vector<Task>{});
    const auto sops = load_registry(rc);
    const auto catalog = load_catalog(rc);

    SessionHooks hooks;
    if (rc.verbose) {
        hooks.on_node = [](const AtomicTree& t, NodeId id) {
            std::cerr << "[round " << t.round_count() << "] " << display_name(t.node(id).action) << "\n";
        };
    }
    auto result = run_session(problem, cfg, SessionBackends::all(*backend), sops, hooks, catalog);

    const fs::path dir = make_run_dir(rc, "solve");
    if (task && result.tree.terminated()) {
        const auto v = score(*task, result.answer.text);
        result.tree.set_evaluation(Evaluation{task->suite, v.correct, v.partial});
    }
    save_trace(dir / "trace.json", result.tree);
    std::cerr << "trace: " << (dir / "trace.json").string() << "\n";

    if (result.failure) {
        std::cerr << "backend failure after " << result.tree.round_count() << " rounds: " << *result.failure << "\n";
        return kBackend;
    }
    write_file(dir / "answer.txt", result.answer.text + "\n");
    const auto& term = *result.tree.termination();
    std::cout << "domain: " << result.domain << "\n"
              << "rounds: " << result.tree.round_count() << " (" << to_string(term.mode) << ")\n";
    if (const auto& ev = result.tree.evaluation()) {
        std::cout << "score: " << (ev->correct ? "correct" : "incorrect") << ", partial " << std::fixed
                  << std::setprecision(3) << ev->partial << "\n";
    }
    std::cout << "\n" << result.answer.text << "\n";
    if (result.answer.extracted) {
        const std::string normalized = format_answer(*result.answer.extracted);
        if (normalized != result.answer.text) std::cout << normalized << "\n";
    }
    return kOk;
}

// ---- bench ----

struct BenchArgs {
    std::string suite;
    std::string strategy = "ar";
    int trials = 3;
    int workers = 0;
    std::string format;
    bool keep_traces = false;
};

int cmd_bench(const RunConfig& rc, const BenchArgs& a) {
    const auto strategy_kind = try_parse_strategy(a.strategy);
    if (!strategy_kind) throw UsageError("unknown strategy '" + a.strategy + "'");
    if (a.trials < 1) throw UsageError("--trials must be at least 1");
    std::optional<TaskFormat> only;
    if (!a.format.empty()) {
        only = try_parse_task_format(a.format);
        if (!only) throw UsageError("unknown task format '" + a.format + "'");
    }
    Strategy strategy;
    strategy.kind = *strategy_kind;
    strategy.session = session_config(rc);

    const TaskSet set = load_tasks(a.suite, only);
    const auto backend = make_backend(rc, set.tasks);
    const auto sops = load_registry(rc);
    const fs::path dir = make_run_dir(rc, "bench");

    if (!set.rejects.empty()) {
        std::string lines;
        for (const auto& r : set.rejects) {
            lines += json{{"line", r.line}, {"reason", to_string(r.reason)}, {"detail", r.detail}}.dump() + "\n";
        }
        write_file(dir / "rejects.jsonl", lines);
        std::cerr << set.rejects.size() << " records rejected, see rejects.jsonl\n";
    }

    BenchOptions opts;
    opts.trials = a.trials;
    opts.workers = a.workers;
    opts.keep_traces = a.keep_traces;
    std::mutex log_mu;
    std::size_t done = 0;
    const std::size_t total = set.tasks.size() * static_cast<std::size_t>(a.trials);
    if (rc.verbose) {
        opts.on_trial = [&](const Task& t, const TrialRecord& r) {
            std::lock_guard lock(log_mu);
            std::cerr << "[" << ++done << "/" << total << "] " << t.id << " trial " << r.trial << ": "
                      << (r.verdict.correct ? "correct" : "incorrect") << "\n";
        };
    }
    BenchReport report = run_benchmark(set.tasks, strategy, SessionBackends::all(*backend), sops, opts);

    if (a.keep_traces) {
        fs::create_directories(dir / "traces");
        for (const auto& r : report.records) {
            if (!r.trace) continue;
            write_file(dir / "traces" / (r.task_id + "-t" + std::to_string(r.trial) + ".json"),
                       serialize_trace(*r.trace));
        }
    }
    write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");

    const auto& agg = report.aggregates;
    std::cout << std::fixed << std::setprecision(3);
    std::cout << "suite: " << report.suite << "  strategy: " << to_string(report.strategy)
              << "  tasks: " << set.tasks.size() << "  trials: " << report.trials << "\n";
    for (const auto& [split, mean] : agg.by_split) std::cout << "  " << split << ": " << mean << "\n";
    std::cout << "overall: " << agg.overall << "  partial: " << agg.overall_partial << "\n";
    std::cout << "calls: " << agg.usage.calls << "  tokens: " << agg.usage.prompt_tokens << "+"
              << agg.usage.completion_tokens << "  failures: " << agg.failures << "\n";
    std::cout << "report: " << (dir / "report.json").string() << "\n";
    return agg.failures == report.records.size() ? kBackend : kOk;
}

// ---- synth ----

struct SynthArgs {
    std::string traces;
    std::string filter = "correct_only";
    std::size_t max_chars = 0;
};

int cmd_synth(const RunConfig& rc, const SynthArgs& a) {
    const auto filter = try_parse_sft_filter(a.filter);
    if (!filter) throw UsageError("unknown filter '" + a.filter + "'");
    if (!fs::is_directory(a.traces)) throw Error(Errc::Io, "not a directory: " + a.traces);

    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(a.traces)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TreeState> trees;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        const std::string text = read_stream(in);
        const auto doc = json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || doc.value("format", "") != "atomr-trace") continue;
        trees.push_back(deserialize_trace(text).state());
    }
    const auto records = to_sft_records(trees, SftOptions{*filter, a.max_chars});
    const fs::path dir = make_run_dir(rc, "synth");
    write_sft(dir / "sft.jsonl", records);
    std::cout << records.size() << " records from " << trees.size() << " traces\n"
              << "sft: " << (dir / "sft.jsonl").string() << "\n";
    return kOk;
}

// ---- inspect ----

int cmd_inspect(const std::string& path, bool as_json) {
    const AtomicTree tree = load_trace(path);
    if (as_json) {
        std::cout << serialize_trace(tree);
        return kOk;
    }
    const auto st = trace_stats(tree.state());
    std::cout << render_tree(tree) << "\n";
    std::cout << "rounds: " << st.rounds << "  chains: " << st.chains << "  backtracks: " << st.backtracks
              << "  checks: " << st.checks << " (" << st.check_errors << " errors)  revisions: " << st.revisions
              << "  flagged: " << st.flagged << "\n";
    std::cout << "actions:";
    for (const auto& [action, n] : st.histogram) std::cout << " " << key(action) << "=" << n;
    std::cout << "\n";
    if (const auto& t = tree.termination()) {
        std::cout << "termination: " << to_string(t->mode) << "\nfinal answer: " << t->final_answer << "\n";
    } else {
        std::cout << "termination: none (partial trace)\n";
    }
    if (const auto& e = tree.evaluation()) {
        std::cout << "evaluation: " << e->suite << " " << (e->correct ? "correct" : "incorrect") << " partial "
                  << e->partial << "\n";
    }
    for (const auto& ev : tree.events()) {
        std::cout << "event r" << ev.round << " " << ev.kind << (ev.detail.empty() ? "" : ": " + ev.detail) << "\n";
    }
    return kOk;
}

// ---- genpuzzles ----

struct GenArgs {
    std::uint64_t seed = 0;
    int count = 20;
    int houses = 3;
    int attributes = 3;
    bool mixed = false;
    std::string suite = "generated";
};

int cmd_genpuzzles(const RunConfig& rc, const GenArgs& a) {
    if (a.count < 1) throw UsageError("--count must be at least 1");
    std::vector<Task> tasks;
    for (int i = 0; i < a.count; ++i) {
        const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
        const int houses = a.mixed ? a.houses + static_cast<int>(seed % 2) : a.houses;
        try {
            tasks.push_back(puzzle_task(gen_puzzle(seed, houses, a.attributes), a.suite));
        } catch (const Error& e) {
            if (e.code() == Errc::PreconditionFailed) throw UsageError(e.what());
            throw;
        }
    }
    const fs::path dir = make_run_dir(rc, "genpuzzles");
    write_tasks(dir / "suite.jsonl", tasks);
    std::cout << tasks.size() << " puzzles\nsuite: " << (dir / "suite.jsonl").string() << "\n";
    return kOk;
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case Errc::Backend: return kBackend;
        case Errc::Io:
        case Errc::ParseError:
        case Errc::EmptySuite:
        case Errc::EmptyProblem:
        case Errc::InvalidProblem:
        case Errc::MissingDefault:
        case Errc::Template:
            return kIo;
        default: return kUsage;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Atomic reasoning engine and benchmark harness"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI file of option defaults; flags override it");

    RunConfig rc;
    app.add_option("--backend", rc.backend, "http, scripted, replay or oracle")->capture_default_str();
    app.add_option("--script", rc.script, "Script file for the scripted backend");
    app.add_option("--base-url", rc.base_url, "OpenAI-compatible endpoint")->capture_default_str();
    app.add_option("--model", rc.model, "Model name")->capture_default_str();
    app.add_option("--api-key-env", rc.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    app.add_option("--timeout", rc.timeout_s, "Per-request timeout in seconds")->capture_default_str();
    app.add_option("--max-retries", rc.max_retries, "Retries for transient HTTP failures")->capture_default_str();
    app.add_option("--max-concurrency", rc.max_concurrency, "Concurrent HTTP requests")->capture_default_str();
    app.add_option("--rps", rc.rps, "Request rate limit per second, 0 for none")->capture_default_str();
    app.add_flag("--lossy", rc.lossy, "Oracle backend gives degraded answers");
    app.add_option("--cache", rc.cache, "record, replay or off")->capture_default_str();
    app.add_option("--cache-dir", rc.cache_dir, "Cache directory")->capture_default_str();
    app.add_option("--max-rounds", rc.max_rounds, "Round cap per session")->capture_default_str();
    app.add_option("--max-chains", rc.max_chains, "Chain cap per session")->capture_default_str();
    app.add_option("--backtrack-after-summary", rc.backtrack_after_summary,
                   "Explore one more branch after the first summary")
        ->capture_default_str();
    app.add_option("--force-verify", rc.force_verify, "Verify a hypothesis before finishing")->capture_default_str();
    app.add_option("--checker", rc.checker, "every, reasoning_only, ending_only or off")->capture_default_str();
    app.add_option("--max-revisions", rc.max_revisions, "Revision cap per node")->capture_default_str();
    app.add_option("--seed", rc.seed, "Sampling seed passed to the backend");
    app.add_option("--triage-with-backend", rc.triage_with_backend, "Ask the backend when keywords don't decide")
        ->capture_default_str();
    app.add_option("--sop-dir", rc.sop_dir, "SOP file or directory, 'none' for no SOP")->capture_default_str();
    app.add_option("--prompt-dir", rc.prompt_dir, "Directory of prompt template overrides");
    app.add_option("--out", rc.out, "Output root")->capture_default_str();
    app.add_option("--run-name", rc.run_name, "Run directory name (default <timestamp>-<command>)");
    app.add_flag("-v,--verbose", rc.verbose, "Progress on stderr");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Run one session on a problem");
    s->add_option("problem", solve.problem, "Problem record (.json) or task file (.jsonl)");
    s->add_flag("--stdin", solve.stdin_input, "Read the problem from stdin");
    s->add_option("--task-id", solve.task_id, "Task to pick from a .jsonl file");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run a task suite");
    b->add_option("suite", bench.suite, "Task file (.jsonl)")->required();
    b->add_option("--strategy", bench.strategy, "ar or single-pass")->capture_default_str();
    b->add_option("--trials", bench.trials, "Trials per task")->capture_default_str();
    b->add_option("--workers", bench.workers, "Worker threads, 0 for min(8, cores)")->capture_default_str();
    b->add_option("--format", bench.format, "Only run tasks of this format");
    b->add_flag("--keep-traces", bench.keep_traces, "Write every trial's trace");

    SynthArgs synth;
    auto* y = app.add_subcommand("synth", "Export traces as SFT records");
    y->add_option("traces", synth.traces, "Directory searched for trace files")->required();
    y->add_option("--filter", synth.filter, "all or correct_only")->capture_default_str();
    y->add_option("--max-chars", synth.max_chars, "Drop longer records, 0 keeps all")->capture_default_str();

    std::string inspect_path;
    bool inspect_json = false;
    auto* i = app.add_subcommand("inspect", "Print a trace");
    i->add_option("trace", inspect_path, "Trace file")->required();
    i->add_flag("--json", inspect_json, "Print the canonical JSON instead");

    GenArgs gen;
    auto* g = app.add_subcommand("genpuzzles", "Generate a logic-grid suite with gold answers");
    g->add_option("--seed", gen.seed, "First seed")->capture_default_str();
    g->add_option("--count", gen.count, "Number of puzzles")->capture_default_str();
    g->add_option("--houses", gen.houses, "Houses per puzzle")->capture_default_str();
    g->add_option("--attributes", gen.attributes, "Attributes per house, the name included")->capture_default_str();
    g->add_flag("--mixed", gen.mixed, "Alternate houses and houses+1 by seed parity");
    g->add_option("--suite", gen.suite, "Suite name")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*s) return cmd_solve(rc, solve);
        if (*b) return cmd_bench(rc, bench);
        if (*y) return cmd_synth(rc, synth);
        if (*i) return cmd_inspect(inspect_path, inspect_json);
        if (*g) return cmd_genpuzzles(rc, gen);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}

}  // namespace atomr::cli

int main(int argc, char** argv) { return atomr::cli::run(argc, argv); }
