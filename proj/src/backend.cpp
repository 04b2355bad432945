#include "fedqa/backend.hpp"

#include <stdexcept>
#include <thread>

#include "fedqa/errors.hpp"

namespace fedqa {

RetryResult with_retry(Backend& backend, const CompletionRequest& req,
                       int max_attempts, std::chrono::milliseconds base_delay) {
    if (max_attempts < 1) {
        throw std::invalid_argument("with_retry requires max_attempts >= 1");
    }
    std::chrono::milliseconds delay = base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            RetryResult result;
            result.texts = backend.complete(req);
            result.attempts = attempt;
            return result;
        } catch (const BackendUnreachable&) {
            if (attempt >= max_attempts) throw;
        } catch (const Timeout&) {
            if (attempt >= max_attempts) throw;
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

}  // namespace fedqa
