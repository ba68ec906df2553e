#include "atomr/backend.hpp"

#include "atomr/scripted_backend.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace atomr {

std::string_view to_string(Role r) noexcept {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "";
}

std::optional<Role> try_parse_role(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    return std::nullopt;
}

void validate(const CompletionRequest& request) {
    if (request.messages.empty()) {
        throw Error(Errc::PreconditionFailed, "completion request has no messages");
    }
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw Error(Errc::PreconditionFailed, "temperature must lie in [0, 2]");
    }
    if (request.max_tokens <= 0) throw Error(Errc::PreconditionFailed, "max_tokens must be positive");
}

std::string_view to_string(ResultSource s) noexcept {
    switch (s) {
        case ResultSource::Network: return "network";
        case ResultSource::Script: return "script";
        case ResultSource::Cache: return "cache";
    }
    return "";
}

std::string_view to_string(BackendErrorKind k) noexcept {
    switch (k) {
        case BackendErrorKind::Timeout: return "Timeout";
        case BackendErrorKind::RateLimited: return "RateLimited";
        case BackendErrorKind::Auth: return "Auth";
        case BackendErrorKind::Malformed: return "Malformed";
        case BackendErrorKind::ScriptExhausted: return "ScriptExhausted";
        case BackendErrorKind::Server: return "Server";
        case BackendErrorKind::Transport: return "Transport";
    }
    return "";
}

std::int64_t estimate_tokens(std::string_view text) noexcept {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

namespace {

std::int64_t prompt_tokens(const CompletionRequest& request) {
    std::int64_t total = 0;
    for (const auto& m : request.messages) total += estimate_tokens(m.content);
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScriptedBackend

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open script " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), e.what());
    }
    auto backend = std::make_unique<ScriptedBackend>(doc.value("model", std::string("scripted")));
    try {
        if (doc.contains("responses")) {
            for (const auto& [tag, list] : doc.at("responses").items()) {
                for (const auto& text : list) backend->push(tag, text.get<std::string>());
            }
        }
        if (doc.contains("default")) {
            for (const auto& text : doc.at("default")) backend->push(text.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), e.what());
    }
    return backend;
}

void ScriptedBackend::push(std::string text) {
    std::lock_guard lock(mu_);
    fallback_.push_back(std::move(text));
}

void ScriptedBackend::push(std::string_view tag, std::string text) {
    std::lock_guard lock(mu_);
    auto it = tagged_.find(tag);
    if (it == tagged_.end()) it = tagged_.emplace(std::string(tag), std::deque<std::string>{}).first;
    it->second.push_back(std::move(text));
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
    validate(request);
    std::lock_guard lock(mu_);
    log_.push_back(request);
    std::deque<std::string>* queue = nullptr;
    if (auto it = tagged_.find(request.tag); it != tagged_.end() && !it->second.empty()) {
        queue = &it->second;
    } else if (!fallback_.empty()) {
        queue = &fallback_;
    }
    if (queue == nullptr) {
        throw BackendError(BackendErrorKind::ScriptExhausted,
                           "no scripted response left for tag '" + request.tag + "'");
    }
    CompletionResult result;
    result.text = std::move(queue->front());
    queue->pop_front();
    result.usage = {prompt_tokens(request), estimate_tokens(result.text)};
    result.source = ResultSource::Script;
    return result;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = fallback_.size();
    for (const auto& [tag, q] : tagged_) n += q.size();
    return n;
}

std::size_t ScriptedBackend::remaining(std::string_view tag) const {
    std::lock_guard lock(mu_);
    auto it = tagged_.find(tag);
    return it == tagged_.end() ? 0 : it->second.size();
}

std::vector<CompletionRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mu_);
    return log_;
}

// ---------------------------------------------------------------------------
// CallbackBackend

CompletionResult CallbackBackend::complete(const CompletionRequest& request) {
    validate(request);
    CompletionResult result;
    result.text = responder_(request);
    result.usage = {prompt_tokens(request), estimate_tokens(result.text)};
    result.source = ResultSource::Script;
    return result;
}

}  // namespace atomr
