#include "atomr/cache_backend.hpp"
#include "atomr/http_backend.hpp"
#include "atomr/metrics.hpp"
#include "atomr/retry.hpp"
#include "atomr/router.hpp"
#include "stub_server.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

namespace atomr {
namespace {

using namespace std::chrono_literals;

CompletionRequest request(std::string text, std::string tag = "solve") {
    CompletionRequest r;
    r.messages = {{Role::System, "sys"}, {Role::User, std::move(text)}};
    r.tag = std::move(tag);
    return r;
}

TEST(Scripted, TaggedQueuesThenFallback) {
    ScriptedBackend b;
    b.push("routing", "r1");
    b.push("any");
    EXPECT_EQ(b.complete(request("x", "routing")).text, "r1");
    EXPECT_EQ(b.complete(request("x", "routing")).text, "any");
    try {
        b.complete(request("x", "check"));
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.kind(), BackendErrorKind::ScriptExhausted);
    }
    EXPECT_EQ(b.requests().size(), 3u);
}

TEST(Scripted, LoadsDocument) {
    const auto b = ScriptedBackend::load(test::fixture("case1_script.json"));
    EXPECT_EQ(b->remaining("routing"), 5u);
    test::TempDir dir;
    std::ofstream(dir.path() / "bad.json") << "{\"responses\": {\"routing\": [1]}}";
    EXPECT_THROW(ScriptedBackend::load(dir.path() / "bad.json"), ParseError);
    EXPECT_THROW(ScriptedBackend::load(dir.path() / "missing.json"), Error);
}

TEST(Scripted, RejectsInvalidRequests) {
    ScriptedBackend b;
    b.push("x");
    auto r = request("x");
    r.temperature = 2.5;
    EXPECT_THROW(b.complete(r), Error);
    r.temperature = 0.0;
    r.messages.clear();
    EXPECT_THROW(b.complete(r), Error);
}

TEST(Callback, ComputesReplyAndPropagatesErrors) {
    CallbackBackend echo([](const CompletionRequest& r) { return r.messages.back().content + "!"; });
    const auto res = echo.complete(request("hi"));
    EXPECT_EQ(res.text, "hi!");
    EXPECT_GT(res.usage.prompt_tokens, 0);
    CallbackBackend failing([](const CompletionRequest&) -> std::string {
        throw BackendError(BackendErrorKind::Auth, "no");
    });
    EXPECT_THROW(failing.complete(request("hi")), BackendError);
}

TEST(Retry, BackoffGrowsWithinJitter) {
    RetryPolicy p;
    EXPECT_EQ(backoff_delay(p, 0, 0.5), 1000ms);
    EXPECT_EQ(backoff_delay(p, 3, 0.5), 8000ms);
    EXPECT_EQ(backoff_delay(p, 0, 0.0), 750ms);
    EXPECT_EQ(backoff_delay(p, 1, 1.0), 2500ms);
    for (int k = 0; k < 5; ++k) {
        for (double u = 0.0; u < 1.0; u += 0.05) {
            const double nominal = 1000.0 * std::pow(2.0, k);
            const auto d = static_cast<double>(backoff_delay(p, k, u).count());
            EXPECT_GE(d, nominal * 0.75 - 0.5);
            EXPECT_LE(d, nominal * 1.25 + 0.5);
        }
    }
}

TEST(Retry, RetriesOnlyTransientKinds) {
    std::vector<std::chrono::milliseconds> slept;
    const Sleeper sleep = [&](std::chrono::milliseconds d) { slept.push_back(d); };
    const auto half = [] { return 0.5; };

    int calls = 0;
    const auto ok = with_retries(
        [&]() -> CompletionResult {
            if (++calls == 1) throw BackendError(BackendErrorKind::RateLimited, "429", 5000ms);
            if (calls == 2) throw BackendError(BackendErrorKind::Timeout, "slow");
            return CompletionResult{"done", {}, 0, ResultSource::Network};
        },
        RetryPolicy{}, sleep, half);
    EXPECT_EQ(ok.text, "done");
    EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{5000ms, 2000ms}));

    calls = 0;
    slept.clear();
    EXPECT_THROW(with_retries(
                     [&]() -> CompletionResult {
                         ++calls;
                         throw BackendError(BackendErrorKind::Malformed, "bad");
                     },
                     RetryPolicy{}, sleep, half),
                 BackendError);
    EXPECT_EQ(calls, 1);

    calls = 0;
    RetryPolicy two;
    two.max_retries = 2;
    try {
        with_retries(
            [&]() -> CompletionResult {
                ++calls;
                throw BackendError(BackendErrorKind::Server, "500");
            },
            two, sleep, half);
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.kind(), BackendErrorKind::Server);
    }
    EXPECT_EQ(calls, 3);
}

TEST(TokenBucket, SpendsBurstThenWaits) {
    auto t = std::chrono::steady_clock::time_point{};
    TokenBucket bucket(2.0, 3.0, [&] { return t; });
    std::vector<std::chrono::milliseconds> waits;
    const Sleeper sleep = [&](std::chrono::milliseconds d) {
        waits.push_back(d);
        t += d;
    };
    for (int i = 0; i < 3; ++i) bucket.acquire(sleep);
    EXPECT_TRUE(waits.empty());
    bucket.acquire(sleep);
    EXPECT_EQ(waits, std::vector<std::chrono::milliseconds>{500ms});
    t += 10s;
    waits.clear();
    for (int i = 0; i < 3; ++i) bucket.acquire(sleep);
    EXPECT_TRUE(waits.empty());
    TokenBucket off(0.0, 1.0, [&] { return t; });
    for (int i = 0; i < 100; ++i) off.acquire(sleep);
    EXPECT_TRUE(waits.empty());
}

TEST(Http, RequestBodyAndResponseParsing) {
    auto r = request("hello");
    r.seed = 7;
    r.temperature = 0.0;
    const auto body = nlohmann::json::parse(chat_request_body("m1", r));
    EXPECT_EQ(body["model"], "m1");
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["content"], "hello");
    EXPECT_EQ(body["seed"], 7);
    EXPECT_EQ(body["temperature"], 0.0);

    const auto res = parse_chat_response(
        R"({"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
    EXPECT_EQ(res.text, "hi");
    EXPECT_EQ(res.usage, (TokenUsage{3, 1}));
    for (const char* bad : {"", "[]", "{\"choices\":[]}", "{\"choices\":[{\"message\":{}}]}"}) {
        try {
            parse_chat_response(bad);
            ADD_FAILURE() << bad;
        } catch (const BackendError& e) {
            EXPECT_EQ(e.kind(), BackendErrorKind::Malformed);
        }
    }
}

TEST(Http, RejectsBadBaseUrl) {
    for (const char* url : {"", "ftp://x", "http://", "localhost:8080"}) {
        HttpConfig c;
        c.base_url = url;
        EXPECT_THROW(HttpBackend{c}, Error) << url;
    }
}

using test::StubServer;

struct HttpRun {
    std::optional<CompletionResult> result;
    std::optional<BackendErrorKind> error;
    int attempts = 0;
    std::vector<std::chrono::milliseconds> slept;
};

HttpRun run_http(const std::string& url, int max_retries = 5) {
    HttpConfig c;
    c.base_url = url;
    c.model = "stub-model";
    c.api_key_env = "ATOMR_TEST_STUB_KEY";
    c.timeout = 300ms;
    c.retry.max_retries = max_retries;
    HttpRun run;
    HttpBackend b(c, [&](std::chrono::milliseconds d) { run.slept.push_back(d); }, [] { return 0.5; });
    try {
        run.result = b.complete(request("ping"));
    } catch (const BackendError& e) {
        run.error = e.kind();
    }
    run.attempts = HttpBackend::last_attempts();
    return run;
}

TEST(Http, StubSequenceRecoversFromTransientFailures) {
    ::setenv("ATOMR_TEST_STUB_KEY", "sk-test", 1);
    StubServer stub({"429", "500", "timeout", "ok"});
    const auto run = run_http(stub.url());
    ASSERT_TRUE(run.result);
    EXPECT_EQ(run.result->text, "stub reply");
    EXPECT_EQ(run.result->usage, (TokenUsage{11, 2}));
    EXPECT_EQ(run.result->source, ResultSource::Network);
    EXPECT_EQ(run.attempts, 4);
    EXPECT_EQ(run.slept, (std::vector<std::chrono::milliseconds>{1000ms, 2000ms, 4000ms}));
    EXPECT_EQ(stub.auth(), "Bearer sk-test");
}

TEST(Http, ErrorClassification) {
    {
        StubServer stub({"malformed"});
        const auto run = run_http(stub.url());
        EXPECT_EQ(run.error, BackendErrorKind::Malformed);
        EXPECT_EQ(run.attempts, 1);
    }
    {
        StubServer stub({"401"});
        EXPECT_EQ(run_http(stub.url()).error, BackendErrorKind::Auth);
    }
    {
        StubServer stub({"500", "500", "500"});
        const auto run = run_http(stub.url(), 2);
        EXPECT_EQ(run.error, BackendErrorKind::Server);
        EXPECT_EQ(run.attempts, 3);
    }
    {
        StubServer stub({"timeout"});
        const auto run = run_http(stub.url(), 0);
        EXPECT_EQ(run.error, BackendErrorKind::Timeout);
    }
    {
        std::string url;
        {
            StubServer closed({});
            url = closed.url();
        }
        const auto run = run_http(url, 1);
        EXPECT_EQ(run.error, BackendErrorKind::Transport);
        EXPECT_EQ(run.attempts, 2);
    }
}

TEST(Http, NoKeyMeansNoAuthorizationHeader) {
    ::unsetenv("ATOMR_TEST_STUB_KEY");
    StubServer stub({"ok"});
    ASSERT_TRUE(run_http(stub.url()).result);
    EXPECT_EQ(stub.auth(), "");
}

TEST(Cache, KeyIsStableAndSensitive) {
    auto a = request("x");
    EXPECT_EQ(cache_key("m", a), cache_key("m", a));
    EXPECT_EQ(cache_key("m", a).size(), 64u);
    auto b = a;
    b.temperature = 0.1;
    EXPECT_NE(cache_key("m", a), cache_key("m", b));
    EXPECT_NE(cache_key("m", a), cache_key("n", a));
    b = a;
    b.tag = "check";
    EXPECT_EQ(cache_key("m", a), cache_key("m", b));
}

TEST(Cache, RecordThenReplayReproducesSessionByteForByte) {
    test::TempDir dir;
    SessionConfig cfg;
    cfg.router.backtrack_after_summary = false;
    const Problem problem = test::case_task(1).problem();

    auto script = std::shared_ptr<Backend>(ScriptedBackend::load(test::fixture("case1_script.json")));
    CachingBackend recorder(script, CacheOptions{CacheMode::Record, dir.path(), true, ""});
    const auto recorded = run_session(problem, cfg, SessionBackends::all(recorder), test::shipped_sops());
    ASSERT_FALSE(recorded.failure);
    EXPECT_GT(std::distance(std::filesystem::directory_iterator(dir.path()), {}), 5);

    CachingBackend replayer(nullptr, CacheOptions{CacheMode::Replay, dir.path(), true, "case1-replay"});
    const auto replayed = run_session(problem, cfg, SessionBackends::all(replayer), test::shipped_sops());
    ASSERT_FALSE(replayed.failure) << *replayed.failure;
    EXPECT_EQ(serialize_trace(replayed.tree), serialize_trace(recorded.tree));

    CachingBackend other_model(nullptr, CacheOptions{CacheMode::Replay, dir.path(), true, "other"});
    try {
        other_model.complete(request("x"));
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.kind(), BackendErrorKind::Malformed);
    }
}

TEST(Cache, NonStrictReplayFallsThrough) {
    test::TempDir dir;
    auto inner = std::make_shared<ScriptedBackend>();
    inner->push("live");
    CachingBackend c(inner, CacheOptions{CacheMode::Replay, dir.path(), false, ""});
    EXPECT_EQ(c.complete(request("x")).text, "live");
    EXPECT_THROW(CachingBackend(nullptr, CacheOptions{CacheMode::Record, dir.path(), true, "m"}), Error);
    EXPECT_EQ(try_parse_cache_mode("off"), CacheMode::Passthrough);
    EXPECT_FALSE(try_parse_cache_mode("sometimes"));
}

}  // namespace
}  // namespace atomr
