#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedqa/answer.hpp"
#include "fedqa/backend.hpp"
#include "fedqa/oracle.hpp"

namespace fedqa {

enum class EvalMethod { ZeroShotCot, FedSpSc, FedDpCot };

struct DatasetItem {
    std::string id;
    std::string text;
    NormalizedAnswer gold;
};

// gsm8k: line-delimited JSON records {"question", "answer"} with the gold
// after "####". svamp: a JSON array (or JSONL) of records with "Body",
// "Question", "Answer"; question text is Body + " " + Question.
std::vector<DatasetItem> load_dataset(const std::filesystem::path& path,
                                      GoldFormat format);

struct EvalConfig {
    EvalMethod method = EvalMethod::ZeroShotCot;
    GoldFormat format = GoldFormat::Gsm8k;
    int paths = 5;
    int exemplars = 4;
    int limit = 0;  // 0 = whole dataset
    std::uint64_t seed = 0;
    double temperature = 0.7;
    int max_tokens = 256;
    bool with_disclaimer = true;
    double synonymy_threshold = 0.15;
    double pseudo_label_threshold = 0.6;
    int retrieve_limit = 16;
    bool capture_prompts = false;  // embed rendered prompts in the records
    // Fed-DP-CoT evaluation set: a curated variant file in the same format,
    // or empty to derive variants by seeded parameter perturbation (needs an
    // oracle script to recompute golds).
    std::string variants_path;
    const OracleScript* oracle_script = nullptr;
    int retry_attempts = 3;
    int retry_base_delay_ms = 200;
};

struct QuestionResult {
    std::string id;
    std::string gold;
    std::optional<std::string> predicted;
    bool correct = false;
    bool evaluated = false;
    std::string method;
    std::optional<double> confidence;
    std::optional<std::string> prompt;  // only when capture_prompts
};

struct EvalReport {
    std::string dataset;
    std::string method;
    int n_questions = 0;
    int n_correct = 0;
    int n_evaluated = 0;
    double accuracy = 0.0;  // n_correct / n_questions, exactly
    bool aborted = false;   // backend exhausted mid-run; tail unevaluated
    std::vector<QuestionResult> records;
    std::string config_json;  // snapshot; rerunning it reproduces the report
};

// Runs one method over the dataset. Backend errors are retried; on
// exhaustion the run aborts with a partial report, remaining questions
// marked unevaluated.
EvalReport run_method(const std::vector<DatasetItem>& items,
                      const std::string& dataset_name, const EvalConfig& config,
                      Backend& backend);

// One fed-sp-sc run per paths value, shared seed.
std::vector<EvalReport> run_paths_ablation(const std::vector<DatasetItem>& items,
                                           const std::string& dataset_name,
                                           const std::vector<int>& paths_list,
                                           EvalConfig config, Backend& backend);

// Two fed-dp-cot runs differing only in with_disclaimer; prompts differ by
// exactly the disclaimer bytes.
std::pair<EvalReport, EvalReport> run_disclaimer_ablation(
    const std::vector<DatasetItem>& items, const std::string& dataset_name,
    EvalConfig config, Backend& backend);

// Line-delimited per-question records followed by one summary record.
// Deterministic bytes: identical report in, identical file out.
void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string report_to_string(const EvalReport& report);

const char* to_string(EvalMethod method);
EvalMethod eval_method_from_string(const std::string& name);

}  // namespace fedqa
