#include "fedqa/http_backend.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <stdexcept>

#ifdef FEDQA_ENABLE_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

// Caps concurrent requests so burst traffic stays inside endpoint rate limits.
class InflightLimiter {
public:
    explicit InflightLimiter(int max) : available_(max > 0 ? max : 1) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

struct InflightGuard {
    explicit InflightGuard(InflightLimiter& limiter) : limiter_(limiter) {
        limiter_.acquire();
    }
    ~InflightGuard() { limiter_.release(); }
    InflightLimiter& limiter_;
};

}  // namespace

struct HttpBackend::Impl {
    HttpBackendConfig config;
    std::string host_part;     // scheme://host[:port]
    std::string path_prefix;   // anything after the authority
    std::string api_key;       // held in memory only, never logged
    InflightLimiter limiter;

    explicit Impl(HttpBackendConfig cfg)
        : config(std::move(cfg)), limiter(config.max_in_flight) {
        if (config.base_url.empty()) {
            throw ConfigError("http backend requires a base_url");
        }
        std::size_t scheme = config.base_url.find("://");
        std::size_t authority_begin = scheme == std::string::npos ? 0 : scheme + 3;
        std::size_t slash = config.base_url.find('/', authority_begin);
        if (slash == std::string::npos) {
            host_part = config.base_url;
        } else {
            host_part = config.base_url.substr(0, slash);
            path_prefix = config.base_url.substr(slash);
            while (!path_prefix.empty() && path_prefix.back() == '/') {
                path_prefix.pop_back();
            }
        }
        if (const char* key = std::getenv(config.api_key_env.c_str())) {
            api_key = key;
        }
    }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::vector<std::string> HttpBackend::complete(const CompletionRequest& req) {
    if (req.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    InflightGuard guard(impl_->limiter);

    nlohmann::json body = {
        {"model", impl_->config.model},
        {"prompt", req.prompt},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
        {"n", req.n_samples},
    };

    httplib::Client client(impl_->host_part);
    client.set_connection_timeout(impl_->config.timeout_s, 0);
    client.set_read_timeout(impl_->config.timeout_s, 0);
    client.set_write_timeout(impl_->config.timeout_s, 0);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->api_key);
    }

    auto result = client.Post(impl_->path_prefix + "/completions", headers,
                              body.dump(), "application/json");
    if (!result) {
        switch (result.error()) {
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Read:
            case httplib::Error::Write:
                throw Timeout("completion request timed out: " +
                              httplib::to_string(result.error()));
            default:
                throw BackendUnreachable("completion endpoint unreachable: " +
                                         httplib::to_string(result.error()));
        }
    }
    if (result->status / 100 != 2) {
        throw BackendRejected(result->status, result->body);
    }

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
        throw BackendRejected(result->status, result->body);
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array()) {
        throw BackendRejected(result->status, result->body);
    }

    std::vector<std::string> texts;
    for (const auto& choice : parsed["choices"]) {
        if (choice.contains("text")) {
            texts.push_back(choice["text"].get<std::string>());
        }
    }
    if (texts.empty()) {
        throw BackendRejected(result->status, result->body);
    }
    return texts;
}

}  // namespace fedqa
