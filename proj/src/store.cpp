#include "fedqa/store.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <mutex>
#include <shared_mutex>

#include "json.hpp"

#include "fedqa/errors.hpp"

namespace fedqa {

using ordered_json = nlohmann::ordered_json;

std::string now_iso8601_utc() {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::string record_to_json_line(const PseudoLabelRecord& record) {
    ordered_json j;
    j["id"] = record.id;
    j["question_text"] = record.question.text;
    j["skeleton"] = record.question.skeleton;
    j["params"] = record.question.params;
    j["answer"] = record.answer.value;
    j["confidence"] = record.confidence;
    j["n_paths"] = record.n_paths;
    j["method"] = record.method;
    j["created_at"] = record.created_at;
    return j.dump();
}

PseudoLabelRecord record_from_json_line(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    PseudoLabelRecord record;
    record.id = j.at("id").get<std::string>();
    record.question.id = record.id;
    record.question.text = j.at("question_text").get<std::string>();
    record.question.skeleton = j.at("skeleton").get<std::string>();
    record.question.params = j.at("params").get<std::vector<std::string>>();
    record.answer.value = j.at("answer").get<std::string>();
    record.answer.raw_span = record.answer.value;
    record.confidence = j.at("confidence").get<double>();
    record.n_paths = j.at("n_paths").get<int>();
    record.method = j.at("method").get<std::string>();
    record.created_at = j.at("created_at").get<std::string>();
    return record;
}

struct QuestionStore::State {
    mutable std::shared_mutex mu;
    std::vector<PseudoLabelRecord> records;  // the in-memory index, scanned linearly
    std::ofstream out;
};

QuestionStore::QuestionStore(std::filesystem::path path, StoreOptions options)
    : path_(std::move(path)), options_(options), state_(std::make_unique<State>()) {
    load();
}

QuestionStore::~QuestionStore() = default;

void QuestionStore::load() {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    std::ifstream in(path_);
    if (in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                state_->records.push_back(record_from_json_line(line));
            } catch (const nlohmann::json::exception& e) {
                throw IoFailure("store file " + path_.string() + " line " +
                                std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    state_->out.open(path_, std::ios::app);
    if (!state_->out) throw IoFailure("cannot open store file for append: " + path_.string());
}

void QuestionStore::validate(const PseudoLabelRecord& record) const {
    if (!(record.confidence > 0.0 && record.confidence <= 1.0)) {
        throw InvalidRecord("confidence must be in (0,1]");
    }
    if (record.n_paths < 1) throw InvalidRecord("n_paths must be >= 1");
    if (record.method != "fed-sp-sc" && record.method != "fed-dp-cot" &&
        record.method != "zero-shot-cot") {
        throw InvalidRecord("unknown method: " + record.method);
    }
    if (record.answer.value.empty() ||
        normalize_number(record.answer.value) != record.answer.value) {
        throw InvalidRecord("answer is not in canonical decimal form: " +
                            record.answer.value);
    }
    if (record.question.skeleton.empty()) {
        throw InvalidRecord("question has an empty skeleton");
    }
}

std::string QuestionStore::put(PseudoLabelRecord record) {
    validate(record);
    std::unique_lock lock(state_->mu);
    if (options_.max_records != 0 && state_->records.size() >= options_.max_records) {
        throw StorageFull("store capped at " + std::to_string(options_.max_records) +
                          " records");
    }
    if (record.id.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "r%06zu", state_->records.size() + 1);
        record.id = buf;
        record.question.id = record.id;
    }
    if (record.created_at.empty()) record.created_at = now_iso8601_utc();

    state_->out << record_to_json_line(record) << '\n';
    state_->out.flush();
    if (!state_->out) throw IoFailure("failed to append to store file: " + path_.string());

    state_->records.push_back(std::move(record));
    return state_->records.back().id;
}

std::vector<std::pair<PseudoLabelRecord, PairRelation>> QuestionStore::retrieve(
    const Question& query, int limit, double threshold) const {
    if (limit < 1) throw std::invalid_argument("retrieve limit must be >= 1");

    std::shared_lock lock(state_->mu);
    struct Hit {
        std::size_t index;
        PairRelation rel;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < state_->records.size(); ++i) {
        PairRelation rel = classify_pair(query, state_->records[i].question, threshold);
        if (rel.kind == PairKind::Unrelated) continue;
        hits.push_back({i, rel});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.rel.similarity != b.rel.similarity) return a.rel.similarity > b.rel.similarity;
        return a.index > b.index;  // recency: later records first among equals
    });
    if (static_cast<int>(hits.size()) > limit) hits.resize(static_cast<std::size_t>(limit));

    std::vector<std::pair<PseudoLabelRecord, PairRelation>> out;
    out.reserve(hits.size());
    for (const auto& hit : hits) out.emplace_back(state_->records[hit.index], hit.rel);
    return out;
}

std::optional<PseudoLabelRecord> QuestionStore::supersede_check(
    const Question& query, double cache_threshold, double synonymy_threshold) const {
    std::shared_lock lock(state_->mu);
    const PseudoLabelRecord* best = nullptr;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < state_->records.size(); ++i) {
        const auto& record = state_->records[i];
        if (record.method != "fed-sp-sc") continue;  // only SC-voted answers qualify
        if (record.confidence < cache_threshold) continue;
        if (classify_pair(query, record.question, synonymy_threshold).kind != PairKind::SP) {
            continue;
        }
        if (!best || record.confidence > best->confidence ||
            (record.confidence == best->confidence && i > best_index)) {
            best = &record;
            best_index = i;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

std::size_t QuestionStore::size() const {
    std::shared_lock lock(state_->mu);
    return state_->records.size();
}

}  // namespace fedqa
