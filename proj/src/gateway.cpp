#include "fedqa/gateway.hpp"

#include <atomic>
#include <cstdio>
#include <future>
#include <mutex>
#include <unordered_map>

#include "fedqa/consistency.hpp"
#include "fedqa/errors.hpp"

namespace fedqa {

// Coalesces simultaneous identical queries: the first becomes the leader and
// pays for the backend calls, followers wait on its future and answer from
// that shared result.
struct Gateway::Coalescer {
    std::mutex mu;
    std::unordered_map<std::string, std::shared_future<QueryResponse>> inflight;
    std::atomic<std::uint64_t> next_id{0};
};

Gateway::Gateway(AppConfig config, std::shared_ptr<Backend> backend,
                 QuestionStore& store)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      store_(store),
      coalescer_(std::make_unique<Coalescer>()) {}

Gateway::~Gateway() = default;

std::string Gateway::next_request_id() {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "req-%06llu",
                  static_cast<unsigned long long>(++coalescer_->next_id));
    return buf;
}

QueryResponse Gateway::handle_query(const std::string& question_text) {
    Question q = canonicalize(question_text);

    std::string key = q.skeleton;
    for (const auto& p : q.params) {
        key.push_back('\x1f');
        key += normalize_number(p);
    }

    std::promise<QueryResponse> promise;
    std::shared_future<QueryResponse> shared;
    bool leader = false;
    {
        std::lock_guard lock(coalescer_->mu);
        auto it = coalescer_->inflight.find(key);
        if (it == coalescer_->inflight.end()) {
            leader = true;
            shared = promise.get_future().share();
            coalescer_->inflight.emplace(key, shared);
        } else {
            shared = it->second;
        }
    }

    if (!leader) {
        QueryResponse response = shared.get();  // rethrows the leader's error
        response.method = "cache";
        response.exemplar_count = 0;
        response.request_id = next_request_id();
        return response;
    }

    try {
        QueryResponse response = process_query(q);
        promise.set_value(response);
        std::lock_guard lock(coalescer_->mu);
        coalescer_->inflight.erase(key);
        return response;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(coalescer_->mu);
        coalescer_->inflight.erase(key);
        throw;
    }
}

QueryResponse Gateway::process_query(const Question& q) {
    QueryResponse response;
    response.request_id = next_request_id();

    if (auto cached = store_.supersede_check(q, config_.cache_threshold,
                                             config_.synonymy_threshold)) {
        response.answer = cached->answer;
        response.method = "cache";
        response.confidence = cached->confidence;
        response.n_paths = cached->n_paths;
        return response;
    }

    auto hits = store_.retrieve(q, config_.retrieve_limit, config_.synonymy_threshold);
    std::vector<Question> sp_peers;
    bool any_dp = false;
    for (const auto& [record, rel] : hits) {
        if (rel.kind == PairKind::SP) {
            sp_peers.push_back(record.question);
        } else {
            any_dp = true;
        }
    }

    EngineConfig engine_cfg;
    engine_cfg.temperature = config_.temperature;
    engine_cfg.max_tokens = config_.max_tokens;
    engine_cfg.seed = config_.seed;

    double stored_confidence = 1.0;
    int stored_paths = 1;

    if (!sp_peers.empty()) {
        // SP voting is the stronger signal; it wins over DP exemplars.
        auto sp = fed_sp_sc(q, sp_peers, config_.paths, *backend_, engine_cfg);
        response.answer = sp.vote.winner;
        response.method = "fed-sp-sc";
        response.confidence = sp.vote.confidence;
        response.n_paths = sp.vote.n_paths;
        stored_confidence = sp.vote.confidence;
        stored_paths = sp.vote.n_paths;
    } else if (any_dp) {
        CotConfig cot_cfg;
        cot_cfg.exemplars_k = config_.exemplars;
        cot_cfg.confidence_threshold = config_.pseudo_label_threshold;
        cot_cfg.synonymy_threshold = config_.synonymy_threshold;
        cot_cfg.retrieve_limit = config_.retrieve_limit;
        auto dp = fed_dp_cot(q, store_, config_.paths, *backend_, engine_cfg, cot_cfg);
        response.answer = dp.answer;
        response.method = dp.method;
        response.exemplar_count = dp.exemplar_count;
        if (dp.fallback_vote) {
            response.confidence = dp.fallback_vote->confidence;
            response.n_paths = dp.fallback_vote->n_paths;
            stored_confidence = dp.fallback_vote->confidence;
            stored_paths = dp.fallback_vote->n_paths;
        } else {
            response.n_paths = 1;
        }
    } else {
        EngineConfig zero_cfg = engine_cfg;
        zero_cfg.temperature = 0.0;
        AnswerSample sample = answer_one_path(q, *backend_, zero_cfg);
        if (!sample.answer) {
            throw AllPathsFailed("zero-shot completion contained no numeric answer");
        }
        response.answer = *sample.answer;
        response.method = "zero-shot-cot";
        response.confidence = 1.0;  // 1 of 1; supersedable by later SC rounds
        response.n_paths = 1;
    }

    PseudoLabelRecord record;
    record.question = q;
    record.answer = response.answer;
    record.confidence = stored_confidence;
    record.n_paths = stored_paths;
    record.method = response.method;
    store_.put(std::move(record));
    return response;
}

std::vector<SearchHit> Gateway::handle_search(const std::string& query_text,
                                              int limit) const {
    if (limit < 1 || limit > 100) {
        throw std::invalid_argument("limit must be in [1,100]");
    }
    Question q = canonicalize(query_text);
    auto hits = store_.retrieve(q, limit, config_.synonymy_threshold);
    std::vector<SearchHit> out;
    out.reserve(hits.size());
    for (const auto& [record, rel] : hits) {
        SearchHit hit;
        hit.id = record.id;
        hit.similarity = rel.similarity;
        hit.kind = to_string(rel.kind);
        hit.answer = record.answer.value;
        hit.confidence = record.confidence;
        hit.n_paths = record.n_paths;
        hit.method = record.method;
        hit.created_at = record.created_at;
        out.push_back(std::move(hit));
    }
    return out;
}

HealthStatus Gateway::handle_health() const {
    return {store_.size(), backend_->kind()};
}

}  // namespace fedqa
