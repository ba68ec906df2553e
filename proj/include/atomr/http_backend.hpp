#pragma once

#include "atomr/backend.hpp"
#include "atomr/retry.hpp"

#include <memory>

namespace atomr {

struct HttpConfig {
    /// e.g. "https://api.openai.com/v1"; requests go to {base_url}/chat/completions.
    std::string base_url;
    /// Name of the environment variable holding the API key. Keys never come
    /// from flags or files.
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model;
    std::chrono::milliseconds timeout{120'000};
    RetryPolicy retry{};
    int max_concurrency = 4;
    /// Requests per second; 0 disables the limiter.
    double requests_per_second = 0.0;
    double burst = 4.0;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public Backend {
public:
    /// Throws Error(PreconditionFailed) if base_url is not http(s)://host[:port][/path].
    explicit HttpBackend(HttpConfig config, Sleeper sleep = {}, std::function<double()> uniform = {});
    ~HttpBackend() override;

    CompletionResult complete(const CompletionRequest& request) override;
    std::string model() const override { return config_.model; }

    /// Attempts made by the most recent complete() on this thread.
    static int last_attempts() noexcept;

private:
    struct Impl;
    HttpConfig config_;
    std::unique_ptr<Impl> impl_;
};

/// Request body exactly as sent on the wire.
std::string chat_request_body(const std::string& model, const CompletionRequest& request);

/// Extracts choices[0].message.content and usage; throws Malformed otherwise.
CompletionResult parse_chat_response(std::string_view body);

}  // namespace atomr
