#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fedqa {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.7;
    int max_tokens = 256;
    int n_samples = 1;
    std::optional<std::uint64_t> seed;  // honored by the oracle backend only
};

// Uniform completion interface. Implementations must be safe to share across
// threads; concurrent complete() calls are capped by an in-flight limit.
class Backend {
public:
    virtual ~Backend() = default;

    // Returns one completion text per sample. With temperature 0 all samples
    // are identical (oracle guarantees this; live endpoints best-effort).
    virtual std::vector<std::string> complete(const CompletionRequest& req) = 0;

    virtual std::string kind() const = 0;
};

struct RetryResult {
    std::vector<std::string> texts;
    int attempts = 0;
};

// Retries BackendUnreachable and Timeout with exponential backoff (delay
// doubles per attempt). BackendRejected is never retried. Propagates the
// last error once attempts are exhausted.
RetryResult with_retry(Backend& backend, const CompletionRequest& req,
                       int max_attempts,
                       std::chrono::milliseconds base_delay);

// Decorator applying with_retry to every call.
class RetryingBackend : public Backend {
public:
    RetryingBackend(Backend& inner, int max_attempts,
                    std::chrono::milliseconds base_delay)
        : inner_(inner), max_attempts_(max_attempts), base_delay_(base_delay) {}

    std::vector<std::string> complete(const CompletionRequest& req) override {
        return with_retry(inner_, req, max_attempts_, base_delay_).texts;
    }
    std::string kind() const override { return inner_.kind(); }

private:
    Backend& inner_;
    int max_attempts_;
    std::chrono::milliseconds base_delay_;
};

}  // namespace fedqa
