#include "atomr/http_backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <regex>
#include <semaphore>
#include <thread>

namespace atomr {

namespace {

thread_local int tls_attempts = 0;

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
    static const std::regex re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(:(\d{1,5}))?(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw Error(Errc::PreconditionFailed, "invalid base_url '" + url + "'");
    }
    ParsedUrl out;
    out.scheme_host_port = m[1].str() + "://" + m[2].str() + (m[3].matched ? m[3].str() : "");
    out.path_prefix = m[5].matched ? m[5].str() : "";
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

std::string excerpt(std::string_view body) {
    constexpr std::size_t kMax = 200;
    return std::string(body.substr(0, kMax)) + (body.size() > kMax ? "..." : "");
}

std::optional<std::chrono::milliseconds> parse_retry_after(const httplib::Result& res) {
    if (!res->has_header("Retry-After")) return std::nullopt;
    try {
        const double seconds = std::stod(res->get_header_value("Retry-After"));
        if (seconds >= 0) return std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000));
    } catch (...) {
    }
    return std::nullopt;
}

}  // namespace

std::string chat_request_body(const std::string& model, const CompletionRequest& request) {
    nlohmann::json body;
    body["model"] = model;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.seed) body["seed"] = *request.seed;
    return body.dump();
}

CompletionResult parse_chat_response(std::string_view body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw BackendError(BackendErrorKind::Malformed, "response is not a JSON object: " + excerpt(body));
    }
    CompletionResult result;
    result.source = ResultSource::Network;
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        result.text = content.is_null() ? std::string() : content.get<std::string>();
        if (auto it = doc.find("usage"); it != doc.end() && it->is_object()) {
            result.usage.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
            result.usage.completion_tokens = it->value("completion_tokens", std::int64_t{0});
        }
    } catch (const nlohmann::json::exception&) {
        throw BackendError(BackendErrorKind::Malformed, "missing choices[0].message.content: " + excerpt(body));
    }
    if (result.usage.prompt_tokens < 0 || result.usage.completion_tokens < 0) {
        throw BackendError(BackendErrorKind::Malformed, "negative usage counters");
    }
    return result;
}

struct HttpBackend::Impl {
    ParsedUrl url;
    std::counting_semaphore<1024> slots;
    TokenBucket bucket;
    Sleeper sleep;
    std::function<double()> uniform;
    std::mutex rng_mu;
    std::mt19937_64 rng{0x5eedULL};

    Impl(const HttpConfig& c, Sleeper s, std::function<double()> u)
        : url(parse_base_url(c.base_url)),
          slots(std::clamp(c.max_concurrency, 1, 1024)),
          bucket(c.requests_per_second, c.burst),
          sleep(s ? std::move(s) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
          uniform(std::move(u)) {
        if (!uniform) {
            uniform = [this] {
                std::lock_guard lock(rng_mu);
                return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            };
        }
    }
};

HttpBackend::HttpBackend(HttpConfig config, Sleeper sleep, std::function<double()> uniform)
    : config_(std::move(config)),
      impl_(std::make_unique<Impl>(config_, std::move(sleep), std::move(uniform))) {}

HttpBackend::~HttpBackend() = default;

int HttpBackend::last_attempts() noexcept { return tls_attempts; }

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
    validate(request);
    const std::string body = chat_request_body(config_.model, request);
    const std::string path = impl_->url.path_prefix + "/chat/completions";

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    tls_attempts = 0;
    auto attempt = [&]() -> CompletionResult {
        ++tls_attempts;
        impl_->bucket.acquire(impl_->sleep);
        impl_->slots.acquire();
        struct Release {
            std::counting_semaphore<1024>& s;
            ~Release() { s.release(); }
        } release{impl_->slots};

        httplib::Client client(impl_->url.scheme_host_port);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(path, headers, body, "application/json");
        const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);

        if (!res) {
            const auto err = res.error();
            if (err == httplib::Error::Read || err == httplib::Error::Write ||
                err == httplib::Error::ConnectionTimeout) {
                throw BackendError(BackendErrorKind::Timeout, "no response within timeout");
            }
            throw BackendError(BackendErrorKind::Transport, httplib::to_string(err));
        }
        const int status = res->status;
        if (status == 429) {
            throw BackendError(BackendErrorKind::RateLimited, "HTTP 429", parse_retry_after(res));
        }
        if (status == 401 || status == 403) {
            throw BackendError(BackendErrorKind::Auth, "HTTP " + std::to_string(status));
        }
        if (status >= 500) {
            throw BackendError(BackendErrorKind::Server, "HTTP " + std::to_string(status));
        }
        if (status != 200) {
            throw BackendError(BackendErrorKind::Malformed,
                               "HTTP " + std::to_string(status) + ": " + excerpt(res->body));
        }
        CompletionResult result = parse_chat_response(res->body);
        result.latency_ms = latency.count();
        return result;
    };
    return with_retries(attempt, config_.retry, impl_->sleep, impl_->uniform);
}

}  // namespace atomr
