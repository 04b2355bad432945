#include <atomic>
#include <stdexcept>
#include <thread>

#ifdef FEDQA_ENABLE_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include "fedqa/errors.hpp"
#include "fedqa/gateway.hpp"

namespace fedqa {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json response_to_json(const QueryResponse& response) {
    ordered_json j;
    j["answer"] = response.answer.value;
    j["method"] = response.method;
    if (response.confidence) j["confidence"] = *response.confidence;
    j["n_paths"] = response.n_paths;
    j["exemplar_count"] = response.exemplar_count;
    j["request_id"] = response.request_id;
    return j;
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
    static std::atomic<std::uint64_t> error_seq{0};
    ordered_json j;
    j["error"] = code;
    j["message"] = message;
    j["request_id"] = "err-" + std::to_string(++error_seq);
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

// Maps library errors onto HTTP statuses: bad input 400, backend trouble 502,
// everything else 500.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const EmptyQuestion& e) {
        send_error(res, 400, "EmptyQuestion", e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const BackendUnreachable& e) {
        send_error(res, 502, "BackendUnreachable", e.what());
    } catch (const Timeout& e) {
        send_error(res, 502, "Timeout", e.what());
    } catch (const BackendRejected& e) {
        send_error(res, 502, "BackendRejected", e.what());
    } catch (const AllPathsFailed& e) {
        send_error(res, 500, "AllPathsFailed", e.what());
    } catch (const Error& e) {
        send_error(res, 500, "InternalError", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
    }
}

}  // namespace

struct GatewayServer::Impl {
    Gateway& gateway;
    std::string host;
    int requested_port;
    int bound_port = 0;
    httplib::Server server;
    std::thread thread;

    Impl(Gateway& gw, std::string h, int p)
        : gateway(gw), host(std::move(h)), requested_port(p) {
        server.Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                ordered_json body;
                try {
                    body = ordered_json::parse(req.body);
                } catch (const nlohmann::json::exception&) {
                    throw std::invalid_argument("request body is not valid JSON");
                }
                if (!body.contains("question") || !body["question"].is_string()) {
                    throw std::invalid_argument("body must be {\"question\": \"...\"}");
                }
                QueryResponse out = gateway.handle_query(body["question"].get<std::string>());
                res.set_content(response_to_json(out).dump(), "application/json");
            });
        });

        server.Get("/v1/store/search", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::string q = req.get_param_value("q");
                int limit = 10;
                if (req.has_param("limit")) {
                    try {
                        limit = std::stoi(req.get_param_value("limit"));
                    } catch (const std::exception&) {
                        throw std::invalid_argument("limit must be an integer");
                    }
                }
                auto hits = gateway.handle_search(q, limit);
                ordered_json arr = ordered_json::array();
                for (const auto& hit : hits) {
                    ordered_json j;
                    j["id"] = hit.id;
                    j["similarity"] = hit.similarity;
                    j["kind"] = hit.kind;
                    j["answer"] = hit.answer;
                    j["confidence"] = hit.confidence;
                    j["n_paths"] = hit.n_paths;
                    j["method"] = hit.method;
                    j["created_at"] = hit.created_at;
                    arr.push_back(std::move(j));
                }
                res.set_content(arr.dump(), "application/json");
            });
        });

        server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                HealthStatus status = gateway.handle_health();
                ordered_json j;
                j["status"] = "ok";
                j["records"] = status.record_count;
                j["backend"] = status.backend_kind;
                res.set_content(j.dump(), "application/json");
            });
        });
    }

    void bind() {
        if (requested_port == 0) {
            bound_port = server.bind_to_any_port(host);
            if (bound_port <= 0) throw IoFailure("cannot bind gateway socket on " + host);
        } else {
            if (!server.bind_to_port(host, requested_port)) {
                throw IoFailure("cannot bind gateway socket on " + host + ":" +
                                std::to_string(requested_port));
            }
            bound_port = requested_port;
        }
    }
};

GatewayServer::GatewayServer(Gateway& gateway, std::string host, int port)
    : impl_(std::make_unique<Impl>(gateway, std::move(host), port)) {}

GatewayServer::~GatewayServer() {
    stop();
}

void GatewayServer::listen() {
    impl_->bind();
    impl_->server.listen_after_bind();
}

void GatewayServer::listen_async() {
    impl_->bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void GatewayServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int GatewayServer::port() const {
    return impl_->bound_port;
}

}  // namespace fedqa
