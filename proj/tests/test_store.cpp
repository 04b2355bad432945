#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "fedqa/errors.hpp"
#include "fedqa/store.hpp"
#include "support.hpp"

using namespace fedqa;
namespace ts = testsupport;

namespace {

PseudoLabelRecord make_record(const std::string& text, const std::string& answer,
                              double confidence, const std::string& method = "fed-sp-sc",
                              int n_paths = 5) {
    PseudoLabelRecord r;
    r.question = canonicalize(text);
    r.answer.value = answer;
    r.answer.raw_span = answer;
    r.confidence = confidence;
    r.n_paths = n_paths;
    r.method = method;
    return r;
}

}  // namespace

TEST_CASE("store: put then retrieve by identical text") {
    ts::TempDir dir("store-roundtrip");
    QuestionStore store(dir.file("s.jsonl"));
    std::string id = store.put(make_record(ts::kFarmQ1, "20", 0.8));
    CHECK(id == "r000001");

    auto hits = store.retrieve(canonicalize(ts::kFarmQ1), 10);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].second.similarity == 1.0);
    CHECK(hits[0].second.kind == PairKind::SP);
    CHECK(hits[0].first.answer.value == "20");
    CHECK(!hits[0].first.created_at.empty());
}

TEST_CASE("store: same skeleton appended twice, later one first among equals") {
    ts::TempDir dir("store-recency");
    QuestionStore store(dir.file("s.jsonl"));
    store.put(make_record(ts::kFarmQ1, "20", 0.6));
    store.put(make_record(ts::kFarmQ1, "24", 0.8));
    auto hits = store.retrieve(canonicalize(ts::kFarmQ1), 10);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].first.answer.value == "24");  // most recent first at equal similarity
    CHECK(hits[1].first.answer.value == "20");
    CHECK(store.size() == 2);
}

TEST_CASE("store: invalid records are rejected") {
    ts::TempDir dir("store-invalid");
    QuestionStore store(dir.file("s.jsonl"));
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmQ1, "20", 0.0)), InvalidRecord);
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmQ1, "20", 1.2)), InvalidRecord);
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmQ1, "20", 0.5, "made-up-method")),
                    InvalidRecord);
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmQ1, "020", 0.5)), InvalidRecord);
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmQ1, "20", 0.5, "fed-sp-sc", 0)),
                    InvalidRecord);
    CHECK(store.size() == 0);
}

TEST_CASE("store: durability across reopen") {
    ts::TempDir dir("store-durable");
    auto path = dir.file("s.jsonl");
    {
        QuestionStore store(path);
        store.put(make_record(ts::kFarmQ1, "20", 0.9));
        store.put(make_record(ts::kFarmDpQ2, "12", 1.0));
    }
    QuestionStore reopened(path);
    CHECK(reopened.size() == 2);
    auto hits = reopened.retrieve(canonicalize(ts::kFarmQ1), 10);
    REQUIRE(!hits.empty());
    CHECK(hits[0].first.answer.value == "20");

    // appends continue the id sequence
    std::string id = reopened.put(make_record(ts::kFarmQ2, "20", 0.7));
    CHECK(id == "r000003");
}

TEST_CASE("store: append-only on disk, record count never decreases") {
    ts::TempDir dir("store-append");
    auto path = dir.file("s.jsonl");
    std::vector<std::size_t> line_counts;
    QuestionStore store(path);
    for (int i = 0; i < 3; ++i) {
        store.put(make_record("Question number " + std::to_string(i) + " has " +
                                  std::to_string(i + 2) + " parts?",
                              std::to_string(i), 0.9));
        std::ifstream in(path);
        std::size_t lines = 0;
        std::string line;
        while (std::getline(in, line)) ++lines;
        line_counts.push_back(lines);
    }
    CHECK(line_counts == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("store: retrieve is deterministic and respects limit") {
    ts::TempDir dir("store-limit");
    QuestionStore store(dir.file("s.jsonl"));
    for (int i = 0; i < 6; ++i) {
        store.put(make_record(ts::kFarmQ1, std::to_string(i + 1), 0.9));
    }
    auto a = store.retrieve(canonicalize(ts::kFarmQ1), 4);
    auto b = store.retrieve(canonicalize(ts::kFarmQ1), 4);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first.id == b[i].first.id);
        CHECK(a[i].second.similarity == b[i].second.similarity);
    }
    CHECK_THROWS_AS(store.retrieve(canonicalize(ts::kFarmQ1), 0), std::invalid_argument);
}

TEST_CASE("store: empty store retrieves nothing") {
    ts::TempDir dir("store-empty");
    QuestionStore store(dir.file("s.jsonl"));
    CHECK(store.retrieve(canonicalize("any question with 3 numbers?"), 5).empty());
}

TEST_CASE("store: canonical question pairs retrieve as SP and DP hits") {
    ts::TempDir dir("store-pairs");
    QuestionStore store(dir.file("s.jsonl"));
    store.put(make_record(ts::kFarmQ1, "20", 1.0));

    auto sp_hits = store.retrieve(canonicalize(ts::kFarmQ2), 10);
    REQUIRE(sp_hits.size() == 1);
    CHECK(sp_hits[0].second.kind == PairKind::SP);

    auto dp_hits = store.retrieve(canonicalize(ts::kFarmDpQ2), 10);
    REQUIRE(dp_hits.size() == 1);
    CHECK(dp_hits[0].second.kind == PairKind::DP);
}

TEST_CASE("store: supersede_check serves only confident SC-voted exact matches") {
    ts::TempDir dir("store-supersede");
    QuestionStore store(dir.file("s.jsonl"));
    Question query = canonicalize(ts::kFarmQ1);

    // below the cache bar
    store.put(make_record(ts::kFarmQ1, "24", 0.4));
    CHECK(!store.supersede_check(query).has_value());

    // confident but single-path zero-shot: stays supersedable, never cached
    store.put(make_record(ts::kFarmQ1, "21", 1.0, "zero-shot-cot", 1));
    CHECK(!store.supersede_check(query).has_value());

    // confident SC vote wins
    store.put(make_record(ts::kFarmQ1, "20", 1.0));
    auto hit = store.supersede_check(query);
    REQUIRE(hit.has_value());
    CHECK(hit->answer.value == "20");

    // an SP rephrasing with the same params is also served
    auto rephrased = store.supersede_check(canonicalize(ts::kFarmQ2));
    REQUIRE(rephrased.has_value());
    CHECK(rephrased->answer.value == "20");

    // DP-only matches never serve from cache
    ts::TempDir dir2("store-supersede-dp");
    QuestionStore dp_store(dir2.file("s.jsonl"));
    dp_store.put(make_record(ts::kFarmDpQ2, "12", 1.0));
    CHECK(!dp_store.supersede_check(query).has_value());
}

TEST_CASE("store: supersede_check picks the highest confidence, then recency") {
    ts::TempDir dir("store-supersede-best");
    QuestionStore store(dir.file("s.jsonl"));
    store.put(make_record(ts::kFarmQ1, "20", 0.9));
    store.put(make_record(ts::kFarmQ1, "24", 1.0));
    store.put(make_record(ts::kFarmQ1, "25", 0.85));
    auto hit = store.supersede_check(canonicalize(ts::kFarmQ1));
    REQUIRE(hit.has_value());
    CHECK(hit->answer.value == "24");
}

TEST_CASE("store: capacity cap raises StorageFull") {
    ts::TempDir dir("store-full");
    StoreOptions options;
    options.max_records = 2;
    QuestionStore store(dir.file("s.jsonl"), options);
    store.put(make_record(ts::kFarmQ1, "20", 0.9));
    store.put(make_record(ts::kFarmQ2, "20", 0.9));
    CHECK_THROWS_AS(store.put(make_record(ts::kFarmDpQ2, "12", 0.9)), StorageFull);
}

TEST_CASE("store: corrupt line surfaces as IoFailure with the line number") {
    ts::TempDir dir("store-corrupt");
    auto path = dir.file("s.jsonl");
    {
        QuestionStore store(path);
        store.put(make_record(ts::kFarmQ1, "20", 0.9));
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "this is not json\n";
    }
    try {
        QuestionStore store(path);
        FAIL("expected IoFailure");
    } catch (const IoFailure& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("store: record json line round-trip") {
    PseudoLabelRecord r = make_record("Count 7 hats and 3 scarves?", "10", 0.8);
    r.id = "r000042";
    r.created_at = "2026-08-01T10:00:00Z";
    PseudoLabelRecord back = record_from_json_line(record_to_json_line(r));
    CHECK(back.id == r.id);
    CHECK(back.question.text == r.question.text);
    CHECK(back.question.skeleton == r.question.skeleton);
    CHECK(back.question.params == r.question.params);
    CHECK(back.answer.value == r.answer.value);
    CHECK(back.confidence == r.confidence);
    CHECK(back.n_paths == r.n_paths);
    CHECK(back.method == r.method);
    CHECK(back.created_at == r.created_at);
}
