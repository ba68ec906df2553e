#pragma once

#include "atomr/error.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atomr {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r) noexcept;
std::optional<Role> try_parse_role(std::string_view text);

struct Message {
    Role role = Role::User;
    std::string content;
    bool operator==(const Message&) const = default;
};

/// Request tags: what a call is for. Scripts key their response queues on these.
namespace tags {
inline constexpr std::string_view kRouting = "routing";
inline constexpr std::string_view kSolve = "solve";
inline constexpr std::string_view kCheck = "check";
inline constexpr std::string_view kSummarize = "summarize";
inline constexpr std::string_view kTriage = "triage";
}  // namespace tags

struct CompletionRequest {
    std::vector<Message> messages;
    double temperature = 0.7;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;
    std::string tag;
};

/// Throws Error(PreconditionFailed) for an empty message list, a temperature
/// outside [0, 2] or a non-positive token cap.
void validate(const CompletionRequest& request);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    bool operator==(const TokenUsage&) const = default;
};

enum class ResultSource { Network, Script, Cache };

std::string_view to_string(ResultSource s) noexcept;

struct CompletionResult {
    std::string text;
    TokenUsage usage;
    std::int64_t latency_ms = 0;
    ResultSource source = ResultSource::Script;
};

enum class BackendErrorKind {
    Timeout,
    RateLimited,
    Auth,
    Malformed,
    ScriptExhausted,
    Server,     // 5xx that outlived the retry budget
    Transport,  // connection refused, TLS failure and similar
};

std::string_view to_string(BackendErrorKind k) noexcept;

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& message,
                 std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
        : Error(Errc::Backend, std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          retry_after_(retry_after) {}

    BackendErrorKind kind() const noexcept { return kind_; }
    std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

private:
    BackendErrorKind kind_;
    std::optional<std::chrono::milliseconds> retry_after_;
};

/// Contract shared by every completion backend. Implementations must be safe
/// to call from several threads at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    /// Model identifier; part of cache keys.
    virtual std::string model() const = 0;
};

/// Rough, deterministic token estimate (about four bytes per token).
std::int64_t estimate_tokens(std::string_view text) noexcept;

}  // namespace atomr
