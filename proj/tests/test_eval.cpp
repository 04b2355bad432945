#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "fedqa/cot.hpp"
#include "fedqa/errors.hpp"
#include "fedqa/eval.hpp"
#include "fedqa/oracle.hpp"
#include "support.hpp"

using namespace fedqa;
namespace ts = testsupport;

namespace {

const std::string kDataDir = FEDQA_TEST_DATA_DIR;

EvalConfig oracle_config(EvalMethod method, std::uint64_t seed, int paths = 5) {
    EvalConfig c;
    c.method = method;
    c.paths = paths;
    c.seed = seed;
    c.retry_base_delay_ms = 1;
    return c;
}

// Oracle wrapper that starts failing permanently after a call budget.
class DyingBackend : public Backend {
public:
    DyingBackend(Backend& inner, int healthy_calls)
        : inner_(inner), remaining_(healthy_calls) {}
    std::vector<std::string> complete(const CompletionRequest& req) override {
        if (remaining_ <= 0) throw BackendUnreachable("link went down");
        --remaining_;
        return inner_.complete(req);
    }
    std::string kind() const override { return inner_.kind(); }

private:
    Backend& inner_;
    int remaining_;
};

}  // namespace

TEST_CASE("load_dataset: gsm8k jsonl fixture") {
    auto items = load_dataset(kDataDir + "/gsm8k_tiny.jsonl", GoldFormat::Gsm8k);
    REQUIRE(items.size() == 3);
    CHECK(items[0].gold.value == "624");
    CHECK(items[1].gold.value == "3");
    CHECK(items[2].gold.value == "24");
    CHECK(items[0].id == "q1");
    CHECK(items[0].text.rfind("James writes", 0) == 0);
}

TEST_CASE("load_dataset: svamp concatenates Body and Question") {
    auto items = load_dataset(kDataDir + "/svamp_tiny.json", GoldFormat::Svamp);
    REQUIRE(items.size() == 3);
    CHECK(items[0].text ==
          "John has 3 apples and buys 4 more. How many apples does John have now?");
    CHECK(items[0].gold.value == "7");
    CHECK(items[1].gold.value == "7");
    CHECK(items[2].gold.value == "60");
}

TEST_CASE("load_dataset: missing marker reports the line number") {
    try {
        load_dataset(kDataDir + "/gsm8k_bad.jsonl", GoldFormat::Gsm8k);
        FAIL("expected MalformedGold");
    } catch (const MalformedGold& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("load_dataset: missing file") {
    CHECK_THROWS_AS(load_dataset(kDataDir + "/does_not_exist.jsonl", GoldFormat::Gsm8k),
                    FileMissing);
}

TEST_CASE("run_method: a perfectly scripted oracle scores 1.0 on every method") {
    const std::size_t n = 12;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 1.0);
    OracleBackend backend(script, 1);
    for (EvalMethod m : {EvalMethod::ZeroShotCot, EvalMethod::FedSpSc, EvalMethod::FedDpCot}) {
        EvalConfig c = oracle_config(m, 1);
        c.oracle_script = &backend.script();
        EvalReport report = run_method(items, "synthetic", c, backend);
        CHECK(report.accuracy == 1.0);
        CHECK(report.n_questions == static_cast<int>(n));
        CHECK(report.n_correct == static_cast<int>(n));
        CHECK(!report.aborted);
    }
}

TEST_CASE("run_method: zero-shot accuracy tracks the scripted probability") {
    const std::size_t n = 2000;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 5);
    EvalReport report =
        run_method(items, "synthetic", oracle_config(EvalMethod::ZeroShotCot, 5), backend);
    CHECK(std::abs(report.accuracy - 0.6) <= 0.03);
}

TEST_CASE("run_method: fed-sp-sc amplifies per the majority-vote reference") {
    const std::size_t n = 600;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 5);
    EvalReport zero =
        run_method(items, "synthetic", oracle_config(EvalMethod::ZeroShotCot, 5), backend);
    EvalReport sc =
        run_method(items, "synthetic", oracle_config(EvalMethod::FedSpSc, 5, 5), backend);
    CHECK(sc.accuracy > zero.accuracy);
    CHECK(std::abs(sc.accuracy - ts::majority_accuracy_reference(5, 0.6)) <= 0.06);
    for (const auto& r : sc.records) {
        CHECK(r.method == "fed-sp-sc");
        if (r.evaluated) CHECK(r.confidence.has_value());
    }
}

TEST_CASE("run_paths_ablation: accuracy rises across 1,3,5 and matches the reference") {
    const std::size_t n = 600;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 5);
    auto reports = run_paths_ablation(items, "synthetic", {1, 3, 5},
                                      oracle_config(EvalMethod::FedSpSc, 5), backend);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].accuracy < reports[1].accuracy);
    CHECK(reports[1].accuracy < reports[2].accuracy);
    const std::vector<int> paths = {1, 3, 5};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(reports[i].accuracy -
                       ts::majority_accuracy_reference(paths[i], 0.6)) <= 0.06);
    }
}

TEST_CASE("run_paths_ablation: paths=1 equals zero-shot question for question") {
    const std::size_t n = 200;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 7);
    EvalReport zero =
        run_method(items, "synthetic", oracle_config(EvalMethod::ZeroShotCot, 7), backend);
    auto reports = run_paths_ablation(items, "synthetic", {1},
                                      oracle_config(EvalMethod::FedSpSc, 7), backend);
    REQUIRE(reports.size() == 1);
    REQUIRE(zero.records.size() == reports[0].records.size());
    for (std::size_t i = 0; i < zero.records.size(); ++i) {
        CHECK(zero.records[i].predicted == reports[0].records[i].predicted);
        CHECK(zero.records[i].correct == reports[0].records[i].correct);
    }
    CHECK(zero.accuracy == reports[0].accuracy);
}

TEST_CASE("run_paths_ablation: repeated paths value reproduces the report") {
    const std::size_t n = 120;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 3);
    auto reports = run_paths_ablation(items, "synthetic", {5, 5},
                                      oracle_config(EvalMethod::FedSpSc, 3), backend);
    REQUIRE(reports.size() == 2);
    CHECK(report_to_string(reports[0]) == report_to_string(reports[1]));
}

TEST_CASE("run_disclaimer_ablation: prompts differ by exactly the disclaimer bytes") {
    const std::size_t n = 30;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 1.0);
    OracleBackend backend(script, 2);
    EvalConfig c = oracle_config(EvalMethod::FedDpCot, 2);
    c.oracle_script = &backend.script();
    auto [with_report, without_report] = run_disclaimer_ablation(items, "synthetic", c, backend);

    // the oracle ignores the prefix, so the accuracies agree exactly
    CHECK(with_report.accuracy == without_report.accuracy);

    REQUIRE(with_report.records.size() == without_report.records.size());
    int compared = 0;
    for (std::size_t i = 0; i < with_report.records.size(); ++i) {
        const auto& with_r = with_report.records[i];
        const auto& without_r = without_report.records[i];
        if (!with_r.prompt || !without_r.prompt) continue;
        std::size_t at = with_r.prompt->find(kDisclaimer);
        REQUIRE(at != std::string::npos);
        std::string stripped = *with_r.prompt;
        stripped.erase(at, kDisclaimer.size());
        CHECK(stripped == *without_r.prompt);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("run_method: fed-dp-cot evaluates derived variants against the store") {
    const std::size_t n = 40;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 1.0);
    OracleBackend backend(script, 11);
    EvalConfig c = oracle_config(EvalMethod::FedDpCot, 11);
    c.oracle_script = &backend.script();
    EvalReport report = run_method(items, "synthetic", c, backend);
    CHECK(report.accuracy == 1.0);
    int dp_count = 0;
    for (const auto& r : report.records) {
        if (r.method == "fed-dp-cot") ++dp_count;
        CHECK(r.id.find("-v") != std::string::npos);  // variants carry derived ids
    }
    CHECK(dp_count == static_cast<int>(n));  // every variant found exemplars
}

TEST_CASE("run_method: fed-dp-cot without script or variants is a config error") {
    auto items = ts::synthetic_dataset(4);
    auto script = ts::synthetic_script(4, 1.0);
    OracleBackend backend(std::move(script), 11);
    EvalConfig c = oracle_config(EvalMethod::FedDpCot, 11);
    CHECK_THROWS_AS(run_method(items, "synthetic", c, backend), ConfigError);
}

TEST_CASE("run_method: curated variants file drives fed-dp-cot evaluation") {
    ts::TempDir dir("variants");
    const std::size_t n = 10;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 1.0);
    OracleBackend backend(script, 11);

    // curated variants: perturbed parameters, gold recomputed by the curator
    auto vpath = dir.file("variants.jsonl");
    {
        std::ofstream out(vpath);
        for (std::size_t i = 0; i < n; ++i) {
            ts::SyntheticCase c = ts::synthetic_case(i);
            std::string text = c.text;
            // bump the first parameter by one
            std::size_t at = text.find(" packs ") + 7;
            long long a = std::stoll(text.substr(at));
            long long b = 3 + static_cast<long long>(i % 7);
            std::string bumped = std::to_string(a + 1);
            text.replace(at, std::to_string(a).size(), bumped);
            out << "{\"question\": \"" << text << "\", \"answer\": \"sum\\n#### "
                << (a + 1 + b) << "\"}\n";
        }
    }
    // scripted answers for the variant skeletons coincide with base skeletons,
    // so extend the script: the variant gold differs from the base answer and
    // the oracle will answer with the base constant. Expect zero accuracy but a
    // fully evaluated fed-dp-cot run; the point is the plumbing.
    EvalConfig c = oracle_config(EvalMethod::FedDpCot, 11);
    c.oracle_script = &backend.script();
    c.variants_path = vpath.string();
    EvalReport report = run_method(items, "synthetic", c, backend);
    CHECK(report.n_questions == static_cast<int>(n));
    CHECK(report.n_evaluated == static_cast<int>(n));
    for (const auto& r : report.records) CHECK(r.method == "fed-dp-cot");
}

TEST_CASE("run_method: backend exhaustion aborts with a partial report") {
    const std::size_t n = 10;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 1.0);
    OracleBackend oracle(std::move(script), 1);
    DyingBackend dying(oracle, /*healthy_calls=*/3);
    EvalConfig c = oracle_config(EvalMethod::ZeroShotCot, 1);
    c.retry_attempts = 2;
    EvalReport report = run_method(items, "synthetic", c, dying);
    CHECK(report.aborted);
    CHECK(report.n_questions == static_cast<int>(n));
    CHECK(report.n_evaluated == 3);
    CHECK(report.records[0].evaluated);
    CHECK(!report.records.back().evaluated);
    CHECK(!report.records.back().predicted.has_value());
    // accuracy still divides by every question
    CHECK(report.accuracy == doctest::Approx(3.0 / 10.0));
}

TEST_CASE("reports: identical configuration reproduces identical bytes") {
    const std::size_t n = 80;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.6);
    OracleBackend backend(std::move(script), 21);
    EvalConfig c = oracle_config(EvalMethod::FedSpSc, 21);
    EvalReport a = run_method(items, "synthetic", c, backend);
    EvalReport b = run_method(items, "synthetic", c, backend);
    CHECK(report_to_string(a) == report_to_string(b));

    ts::TempDir dir("reports");
    write_report(a, dir.file("a.jsonl"));
    write_report(b, dir.file("b.jsonl"));
    CHECK(ts::read_file(dir.file("a.jsonl")) == ts::read_file(dir.file("b.jsonl")));
    CHECK(!ts::read_file(dir.file("a.jsonl")).empty());
}

TEST_CASE("reports: accuracy bounds and exact bookkeeping") {
    const std::size_t n = 50;
    auto items = ts::synthetic_dataset(n);
    auto script = ts::synthetic_script(n, 0.5);
    OracleBackend backend(std::move(script), 33);
    EvalReport report =
        run_method(items, "synthetic", oracle_config(EvalMethod::ZeroShotCot, 33), backend);
    CHECK(report.accuracy >= 0.0);
    CHECK(report.accuracy <= 1.0);
    int correct = 0;
    for (const auto& r : report.records) {
        if (r.correct) ++correct;
    }
    CHECK(report.n_correct == correct);
    CHECK(report.accuracy ==
          static_cast<double>(correct) / static_cast<double>(report.n_questions));
}

TEST_CASE("run_method: limit truncates the dataset") {
    auto items = ts::synthetic_dataset(30);
    auto script = ts::synthetic_script(30, 1.0);
    OracleBackend backend(std::move(script), 3);
    EvalConfig c = oracle_config(EvalMethod::ZeroShotCot, 3);
    c.limit = 7;
    EvalReport report = run_method(items, "synthetic", c, backend);
    CHECK(report.n_questions == 7);
}
