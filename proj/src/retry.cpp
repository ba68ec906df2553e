#include "atomr/retry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace atomr {

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, double u) {
    const double nominal = static_cast<double>(policy.base.count()) * std::pow(policy.factor, retry);
    const double scale = 1.0 + policy.jitter * (2.0 * std::clamp(u, 0.0, 1.0) - 1.0);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(std::max(0.0, nominal * scale))));
}

bool is_retryable(BackendErrorKind kind) noexcept {
    switch (kind) {
        case BackendErrorKind::Timeout:
        case BackendErrorKind::RateLimited:
        case BackendErrorKind::Server:
        case BackendErrorKind::Transport:
            return true;
        case BackendErrorKind::Auth:
        case BackendErrorKind::Malformed:
        case BackendErrorKind::ScriptExhausted:
            return false;
    }
    return false;
}

TokenBucket::TokenBucket(double rate, double burst, SteadyNow now)
    : rate_(rate),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      now_(now ? std::move(now) : SteadyNow([] { return std::chrono::steady_clock::now(); })),
      last_(now_()) {}

void TokenBucket::acquire(const Sleeper& sleep) {
    if (rate_ <= 0.0) return;
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard lock(mu_);
            const auto t = now_();
            const double elapsed = std::chrono::duration<double>(t - last_).count();
            last_ = t;
            tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::milliseconds(
                static_cast<std::int64_t>(std::ceil((1.0 - tokens_) / rate_ * 1000.0)));
        }
        sleep(wait);
    }
}

}  // namespace atomr
