#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedqa/backend.hpp"
#include "fedqa/config.hpp"
#include "fedqa/cot.hpp"
#include "fedqa/store.hpp"

namespace fedqa {

struct QueryResponse {
    NormalizedAnswer answer;
    std::string method;  // fed-sp-sc | fed-dp-cot | zero-shot-cot | cache
    std::optional<double> confidence;
    int n_paths = 0;
    int exemplar_count = 0;
    std::string request_id;
};

// One store-search hit. Deliberately carries no stored question text: answers
// and metadata may be shared, raw user text may not.
struct SearchHit {
    std::string id;
    double similarity = 0.0;
    std::string kind;  // SP | DP
    std::string answer;
    double confidence = 0.0;
    int n_paths = 0;
    std::string method;
    std::string created_at;
};

struct HealthStatus {
    std::size_t record_count = 0;
    std::string backend_kind;
};

// Orchestrates the full query flow: canonicalize, serve from cache when a
// high-confidence exact match exists, otherwise retrieve and route (SP peers
// to self-consistency voting, DP pseudo-labels to CoT prompting, empty store
// to zero-shot), then write the answer back so the pool grows.
class Gateway {
public:
    Gateway(AppConfig config, std::shared_ptr<Backend> backend,
            QuestionStore& store);
    ~Gateway();

    // Throws EmptyQuestion / AllPathsFailed / backend errors; the HTTP layer
    // maps them to 400 / 500 / 502.
    QueryResponse handle_query(const std::string& question_text);

    // Read-only mirror of QuestionStore::retrieve. limit must be in [1,100].
    std::vector<SearchHit> handle_search(const std::string& query_text,
                                         int limit) const;

    // Never touches the backend.
    HealthStatus handle_health() const;

    const AppConfig& config() const { return config_; }

private:
    QueryResponse process_query(const Question& q);
    std::string next_request_id();

    AppConfig config_;
    std::shared_ptr<Backend> backend_;
    QuestionStore& store_;
    struct Coalescer;
    std::unique_ptr<Coalescer> coalescer_;
};

// Blocking HTTP server exposing POST /v1/query, GET /v1/store/search and
// GET /v1/health. Errors render as {"error", "message", "request_id"}.
class GatewayServer {
public:
    GatewayServer(Gateway& gateway, std::string host, int port);
    ~GatewayServer();

    // Binds and serves on the configured address. listen() blocks;
    // listen_async() returns once the socket accepts connections and is used
    // by tests. port() reports the bound port (useful with port 0).
    void listen();
    void listen_async();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedqa
