#include "atomr/cache_backend.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace atomr {

std::optional<CacheMode> try_parse_cache_mode(std::string_view text) {
    if (text == "record") return CacheMode::Record;
    if (text == "replay") return CacheMode::Replay;
    if (text == "off" || text == "passthrough") return CacheMode::Passthrough;
    return std::nullopt;
}

namespace {

nlohmann::json request_json(const std::string& model, const CompletionRequest& request) {
    nlohmann::json j;
    j["model"] = model;
    j["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) {
        j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_tokens;
    j["seed"] = request.seed ? nlohmann::json(*request.seed) : nlohmann::json(nullptr);
    return j;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace

std::string canonical_request(const std::string& model, const CompletionRequest& request) {
    return request_json(model, request).dump();
}

std::string cache_key(const std::string& model, const CompletionRequest& request) {
    return sha256_hex(canonical_request(model, request));
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, CacheOptions options)
    : inner_(std::move(inner)), options_(std::move(options)) {
    if (!inner_ && !(options_.mode == CacheMode::Replay && options_.strict)) {
        throw Error(Errc::PreconditionFailed, "cache layer needs an inner backend unless replaying strictly");
    }
    if (!inner_ && options_.model.empty()) {
        throw Error(Errc::PreconditionFailed, "replay without an inner backend needs a model name");
    }
    if (options_.mode == CacheMode::Record) {
        std::error_code ec;
        std::filesystem::create_directories(options_.dir, ec);
        if (ec) throw Error(Errc::Io, "cannot create cache dir " + options_.dir.string() + ": " + ec.message());
    }
}

std::string CachingBackend::model() const {
    return options_.model.empty() ? inner_->model() : options_.model;
}

CompletionResult CachingBackend::complete(const CompletionRequest& request) {
    validate(request);
    if (options_.mode == CacheMode::Passthrough) return inner_->complete(request);

    const std::string model_name = model();
    const auto req = request_json(model_name, request);
    const std::string key = sha256_hex(req.dump());
    const auto file = options_.dir / (key + ".json");

    if (options_.mode == CacheMode::Replay) {
        std::ifstream in(file);
        if (in) {
            const auto doc = nlohmann::json::parse(in, nullptr, false);
            if (!doc.is_discarded() && doc.value("request", nlohmann::json()) == req) {
                CompletionResult result;
                const auto& r = doc.at("result");
                result.text = r.at("text").get<std::string>();
                result.usage.prompt_tokens = r.at("usage").at("prompt_tokens").get<std::int64_t>();
                result.usage.completion_tokens = r.at("usage").at("completion_tokens").get<std::int64_t>();
                result.latency_ms = r.value("latency_ms", std::int64_t{0});
                result.source = ResultSource::Cache;
                return result;
            }
        }
        if (options_.strict || !inner_) {
            throw BackendError(BackendErrorKind::Malformed, "cache miss for key " + key);
        }
        return inner_->complete(request);
    }

    // Record
    CompletionResult result = inner_->complete(request);
    nlohmann::json doc;
    doc["key"] = key;
    doc["request"] = req;
    doc["result"] = {{"text", result.text},
                     {"usage",
                      {{"prompt_tokens", result.usage.prompt_tokens},
                       {"completion_tokens", result.usage.completion_tokens}}},
                     {"latency_ms", result.latency_ms}};
    static std::atomic<std::uint64_t> counter{0};
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
             << counter.fetch_add(1);
    const auto tmp = options_.dir / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Io, "cannot write cache entry " + tmp.string());
        out << doc.dump(2) << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) throw Error(Errc::Io, "cannot commit cache entry " + file.string() + ": " + ec.message());
    return result;
}

}  // namespace atomr
