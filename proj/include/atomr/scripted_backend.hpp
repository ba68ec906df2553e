#pragma once

#include "atomr/backend.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

namespace atomr {

/// Deterministic, network-free backend that replays queued responses.
///
/// Responses pushed with a tag are served to requests carrying that tag;
/// untagged responses form a shared fallback queue. When both are empty the
/// call fails with ScriptExhausted.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::string model = "scripted") : model_(std::move(model)) {}

    /// Reads a script document:
    ///   {"model": "...", "responses": {"routing": ["..."], ...}, "default": ["..."]}
    static std::unique_ptr<ScriptedBackend> load(const std::filesystem::path& path);

    void push(std::string text);
    void push(std::string_view tag, std::string text);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string model() const override { return model_; }

    std::size_t remaining() const;
    std::size_t remaining(std::string_view tag) const;
    /// Every request served so far, in order.
    std::vector<CompletionRequest> requests() const;

private:
    std::string model_;
    mutable std::mutex mu_;
    std::deque<std::string> fallback_;
    std::map<std::string, std::deque<std::string>, std::less<>> tagged_;
    std::vector<CompletionRequest> log_;
};

/// Backend computing its reply from the request. The callback must be
/// thread-safe; it may throw BackendError to simulate failures.
class CallbackBackend final : public Backend {
public:
    using Responder = std::function<std::string(const CompletionRequest&)>;

    explicit CallbackBackend(Responder responder, std::string model = "callback")
        : responder_(std::move(responder)), model_(std::move(model)) {}

    CompletionResult complete(const CompletionRequest& request) override;
    std::string model() const override { return model_; }

private:
    Responder responder_;
    std::string model_;
};

}  // namespace atomr
