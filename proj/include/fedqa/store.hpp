#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedqa/answer.hpp"
#include "fedqa/question.hpp"

namespace fedqa {

// A stored question with its voted answer. Immutable once written;
// corrections append a new record with the same skeleton.
struct PseudoLabelRecord {
    std::string id;  // assigned by the store when empty
    Question question;
    NormalizedAnswer answer;
    double confidence = 0.0;  // vote fraction, in (0,1]
    int n_paths = 0;
    std::string method;      // fed-sp-sc | fed-dp-cot | zero-shot-cot
    std::string created_at;  // ISO-8601 UTC, stamped by the store when empty
};

struct StoreOptions {
    std::size_t max_records = 0;  // 0 = unlimited; exceeded puts throw StorageFull
};

// Append-only store of pseudo-labeled questions backed by a single
// line-delimited JSON file. The whole log is loaded on open and an in-memory
// skeleton index is rebuilt; retrieval scans linearly, which is fine at desk
// scale. Single writer, concurrent readers.
class QuestionStore {
public:
    explicit QuestionStore(std::filesystem::path path, StoreOptions options = {});
    ~QuestionStore();

    QuestionStore(const QuestionStore&) = delete;
    QuestionStore& operator=(const QuestionStore&) = delete;

    // Durably appends the record and returns its id. Invalid records
    // (confidence outside (0,1], bad method, unnormalized answer) throw
    // InvalidRecord.
    std::string put(PseudoLabelRecord record);

    // All records with similarity >= threshold, classified SP/DP against the
    // query, sorted by similarity descending then recency descending,
    // truncated to limit.
    std::vector<std::pair<PseudoLabelRecord, PairRelation>> retrieve(
        const Question& query, int limit,
        double threshold = kDefaultSynonymyThreshold) const;

    // Highest-confidence SC-voted SP record for this skeleton+params when one
    // exists at or above the serve-from-cache bar; the caller may then answer
    // without any backend call. Only fed-sp-sc records qualify, so single-path
    // answers stay supersedable by later voting rounds.
    std::optional<PseudoLabelRecord> supersede_check(
        const Question& query, double cache_threshold = 0.8,
        double synonymy_threshold = kDefaultSynonymyThreshold) const;

    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    void load();
    void validate(const PseudoLabelRecord& record) const;

    std::filesystem::path path_;
    StoreOptions options_;
    struct State;
    std::unique_ptr<State> state_;
};

// Serialization used by the store file; exposed for tooling and tests.
std::string record_to_json_line(const PseudoLabelRecord& record);
PseudoLabelRecord record_from_json_line(const std::string& line);

std::string now_iso8601_utc();

}  // namespace fedqa
