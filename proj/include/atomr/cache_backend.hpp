#pragma once

#include "atomr/backend.hpp"

#include <filesystem>
#include <memory>

namespace atomr {

enum class CacheMode { Record, Replay, Passthrough };

std::optional<CacheMode> try_parse_cache_mode(std::string_view text);

struct CacheOptions {
    CacheMode mode = CacheMode::Passthrough;
    std::filesystem::path dir;
    /// Replay misses fail with Malformed("cache miss") when strict; otherwise
    /// they fall through to the inner backend.
    bool strict = true;
    /// Overrides the inner backend's model name in keys (required when
    /// replaying without an inner backend).
    std::string model;
};

/// Record/replay layer. One file per key under `dir`, named <sha256>.json and
/// holding the canonical request next to the stored result.
class CachingBackend final : public Backend {
public:
    /// `inner` may be null only in strict Replay mode.
    CachingBackend(std::shared_ptr<Backend> inner, CacheOptions options);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string model() const override;

private:
    std::shared_ptr<Backend> inner_;
    CacheOptions options_;
};

/// Canonical JSON of the fields that identify a request.
std::string canonical_request(const std::string& model, const CompletionRequest& request);

/// Lowercase hex SHA-256 of canonical_request.
std::string cache_key(const std::string& model, const CompletionRequest& request);

}  // namespace atomr
