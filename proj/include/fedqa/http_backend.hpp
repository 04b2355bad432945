#pragma once

#include <memory>
#include <string>

#include "fedqa/backend.hpp"

namespace fedqa {

struct HttpBackendConfig {
    std::string base_url;                       // e.g. "https://api.openai.com/v1"
    std::string model;                          // config string, never hardcoded
    std::string api_key_env = "FEDQA_API_KEY";  // env var holding the key
    int timeout_s = 120;
    int max_in_flight = 4;
    int retry_attempts = 3;
    int retry_base_delay_ms = 500;
};

// Client for OpenAI-compatible completion endpoints: POST {base_url}/completions
// with {"model", "prompt", "temperature", "max_tokens", "n"} and bearer-token
// auth. The key is read from the configured environment variable once and is
// never logged or echoed back in errors.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    std::vector<std::string> complete(const CompletionRequest& req) override;
    std::string kind() const override { return "http"; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedqa
