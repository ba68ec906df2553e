#pragma once

#include "atomr/backend.hpp"

#include <chrono>
#include <functional>
#include <mutex>
#include <random>

namespace atomr {

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using SteadyNow = std::function<std::chrono::steady_clock::time_point()>;

struct RetryPolicy {
    int max_retries = 5;
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    /// Symmetric jitter as a fraction of the nominal delay, in [0, 1).
    double jitter = 0.25;
};

/// Delay before retry number `retry` (zero-based): base * factor^retry,
/// scaled by (1 + jitter * (2u - 1)) for u in [0, 1).
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, double u);

bool is_retryable(BackendErrorKind kind) noexcept;

/// Runs `attempt` until it succeeds, fails with a non-retryable error, or the
/// retry budget is spent; the last error is rethrown. RateLimited honours the
/// server's retry-after when it is longer than the computed backoff.
template <class Attempt>
CompletionResult with_retries(Attempt&& attempt, const RetryPolicy& policy, const Sleeper& sleep,
                              const std::function<double()>& uniform) {
    for (int retry = 0;; ++retry) {
        try {
            return attempt();
        } catch (const BackendError& e) {
            if (!is_retryable(e.kind()) || retry >= policy.max_retries) throw;
            auto delay = backoff_delay(policy, retry, uniform());
            if (e.retry_after() && *e.retry_after() > delay) delay = *e.retry_after();
            sleep(delay);
        }
    }
}

/// Token bucket: `rate` tokens per second, at most `burst` stored. A rate of
/// zero disables limiting.
class TokenBucket {
public:
    TokenBucket(double rate, double burst, SteadyNow now = {});

    /// Blocks (through `sleep`) until a token is available, then takes it.
    void acquire(const Sleeper& sleep);

private:
    double rate_;
    double burst_;
    double tokens_;
    SteadyNow now_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

}  // namespace atomr
