#include "fedqa/eval.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fedqa/consistency.hpp"
#include "fedqa/cot.hpp"
#include "fedqa/errors.hpp"
#include "fedqa/store.hpp"

namespace fedqa {

using ordered_json = nlohmann::ordered_json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string json_answer_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

// Self-deleting scratch store used to seed pseudo-labels for Fed-DP-CoT runs.
struct ScratchStore {
    std::filesystem::path path;
    std::unique_ptr<QuestionStore> store;

    explicit ScratchStore(std::uint64_t tag) {
        static std::atomic<std::uint64_t> seq{0};
        path = std::filesystem::temp_directory_path() /
               ("fedqa-eval-" + std::to_string(splitmix64(tag)) + "-" +
                std::to_string(::getpid()) + "-" + std::to_string(++seq) + ".jsonl");
        std::filesystem::remove(path);
        store = std::make_unique<QuestionStore>(path);
    }
    ~ScratchStore() {
        store.reset();
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
};

bool is_backend_failure(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const BackendUnreachable&) {
        return true;
    } catch (const Timeout&) {
        return true;
    } catch (const BackendRejected&) {
        return true;
    } catch (...) {
        return false;
    }
}

ordered_json config_snapshot(const EvalConfig& config, const std::string& dataset) {
    ordered_json j;
    j["dataset"] = dataset;
    j["method"] = to_string(config.method);
    j["paths"] = config.paths;
    j["exemplars"] = config.exemplars;
    j["limit"] = config.limit;
    j["seed"] = config.seed;
    j["temperature"] = config.temperature;
    j["max_tokens"] = config.max_tokens;
    j["with_disclaimer"] = config.with_disclaimer;
    j["synonymy_threshold"] = config.synonymy_threshold;
    j["pseudo_label_threshold"] = config.pseudo_label_threshold;
    j["retrieve_limit"] = config.retrieve_limit;
    j["variants"] = config.variants_path;
    return j;
}

void finalize(EvalReport& report) {
    report.n_questions = static_cast<int>(report.records.size());
    report.n_correct = 0;
    report.n_evaluated = 0;
    for (const auto& r : report.records) {
        if (r.correct) ++report.n_correct;
        if (r.evaluated) ++report.n_evaluated;
    }
    report.accuracy = report.n_questions == 0
                          ? 0.0
                          : static_cast<double>(report.n_correct) /
                                static_cast<double>(report.n_questions);
}

// Runs fn per question; a backend failure (after retries) aborts the run and
// marks the remaining questions unevaluated.
template <typename Fn>
void for_each_question(EvalReport& report, const std::vector<DatasetItem>& items,
                       Fn&& fn) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        QuestionResult result;
        result.id = items[i].id;
        result.gold = items[i].gold.value;
        try {
            fn(items[i], result);
            result.evaluated = true;
        } catch (...) {
            if (!is_backend_failure(std::current_exception())) throw;
            report.aborted = true;
            report.records.push_back(std::move(result));
            for (std::size_t j = i + 1; j < items.size(); ++j) {
                QuestionResult rest;
                rest.id = items[j].id;
                rest.gold = items[j].gold.value;
                report.records.push_back(std::move(rest));
            }
            return;
        }
        report.records.push_back(std::move(result));
    }
}

std::vector<DatasetItem> limited(const std::vector<DatasetItem>& items, int limit) {
    if (limit <= 0 || static_cast<int>(items.size()) <= limit) return items;
    return {items.begin(), items.begin() + limit};
}

// Mechanized Fig-6 step 1: perturb every parameter by a seeded offset in
// [1,9]. The skeleton is unchanged, so the scripted answer still applies and
// serves as the recomputed gold.
std::vector<DatasetItem> derive_variants(const std::vector<DatasetItem>& items,
                                         const EvalConfig& config) {
    if (!config.oracle_script) {
        throw ConfigError(
            "fed-dp-cot without a variants file needs an oracle script to recompute golds");
    }
    std::vector<DatasetItem> variants;
    variants.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        Question q = canonicalize(items[i].text, items[i].id);
        const OracleEntry* entry = config.oracle_script->find(q.skeleton);
        if (!entry) {
            throw ConfigError("oracle script does not cover question " + items[i].id);
        }
        std::string text = q.skeleton;
        for (std::size_t pi = 0; pi < q.params.size(); ++pi) {
            std::uint64_t h = splitmix64(splitmix64(config.seed ^ 0xA5A5A5A5A5A5A5A5ULL) +
                                         i * 131 + pi);
            long long offset = 1 + static_cast<long long>(h % 9);
            std::string token = q.params[pi];
            std::size_t dot = token.find('.');
            std::string int_part = dot == std::string::npos ? token : token.substr(0, dot);
            std::string frac_part = dot == std::string::npos ? "" : token.substr(dot);
            std::string perturbed = token;
            try {
                long long value = int_part.empty() ? 0 : std::stoll(int_part);
                perturbed = std::to_string(value + offset) + frac_part;
            } catch (const std::exception&) {
                // parameter too large to perturb; keep it as-is
            }
            std::size_t at = text.find(kNumPlaceholder);
            text.replace(at, kNumPlaceholder.size(), perturbed);
        }
        DatasetItem variant;
        variant.id = items[i].id + "-v";
        variant.text = text;
        variant.gold.value = entry->correct_answer;
        variant.gold.raw_span = entry->correct_answer;
        variants.push_back(std::move(variant));
    }
    return variants;
}

EvalReport run_zero_shot(const std::vector<DatasetItem>& items,
                         const std::string& dataset_name, const EvalConfig& config,
                         Backend& backend) {
    EvalReport report;
    report.dataset = dataset_name;
    report.method = to_string(config.method);
    report.config_json = config_snapshot(config, dataset_name).dump();

    EngineConfig engine_cfg{0.0, config.max_tokens, config.seed};
    for_each_question(report, items, [&](const DatasetItem& item, QuestionResult& result) {
        Question q = canonicalize(item.text, item.id);
        AnswerSample sample = answer_one_path(q, backend, engine_cfg);
        result.method = "zero-shot-cot";
        if (config.capture_prompts) result.prompt = q.text + std::string(kZeroShotSuffix);
        if (sample.answer) {
            result.predicted = sample.answer->value;
            result.correct = answers_equal(*sample.answer, item.gold);
        }
    });
    finalize(report);
    return report;
}

EvalReport run_fed_sp_sc(const std::vector<DatasetItem>& items,
                         const std::string& dataset_name, const EvalConfig& config,
                         Backend& backend) {
    EvalReport report;
    report.dataset = dataset_name;
    report.method = to_string(config.method);
    report.config_json = config_snapshot(config, dataset_name).dump();

    EngineConfig engine_cfg{config.temperature, config.max_tokens, config.seed};
    for_each_question(report, items, [&](const DatasetItem& item, QuestionResult& result) {
        Question q = canonicalize(item.text, item.id);
        result.method = "fed-sp-sc";
        if (config.capture_prompts) result.prompt = q.text + std::string(kZeroShotSuffix);
        try {
            SpScResult sp = fed_sp_sc(q, {}, config.paths, backend, engine_cfg);
            result.predicted = sp.vote.winner.value;
            result.confidence = sp.vote.confidence;
            result.correct = answers_equal(sp.vote.winner, item.gold);
        } catch (const AllPathsFailed&) {
            // evaluated, no extractable answer: counts as incorrect
        }
    });
    finalize(report);
    return report;
}

EvalReport run_fed_dp_cot(const std::vector<DatasetItem>& items,
                          const std::string& dataset_name, const EvalConfig& config,
                          Backend& backend) {
    EvalReport report;
    report.dataset = dataset_name;
    report.method = to_string(config.method);
    report.config_json = config_snapshot(config, dataset_name).dump();

    std::vector<DatasetItem> variants =
        config.variants_path.empty()
            ? derive_variants(items, config)
            : limited(load_dataset(config.variants_path, config.format), config.limit);

    // Stage 1: answer the base questions by self-consistency and store the
    // voted answers as pseudo-labels.
    ScratchStore scratch(config.seed ^ splitmix64(items.size() + 0x5EED));
    EngineConfig engine_cfg{config.temperature, config.max_tokens, config.seed};
    for (const auto& item : items) {
        Question q = canonicalize(item.text, item.id);
        try {
            SpScResult sp = fed_sp_sc(q, {}, config.paths, backend, engine_cfg);
            PseudoLabelRecord record;
            record.question = q;
            record.answer = sp.vote.winner;
            record.confidence = sp.vote.confidence;
            record.n_paths = sp.vote.n_paths;
            record.method = "fed-sp-sc";
            record.created_at = "1970-01-01T00:00:00Z";  // keep seeding reproducible
            scratch.store->put(std::move(record));
        } catch (const AllPathsFailed&) {
            // no pseudo-label for this one
        }
    }

    // Stage 2: evaluate the parameter-varied questions with composed CoT.
    CotConfig cot_cfg;
    cot_cfg.exemplars_k = config.exemplars;
    cot_cfg.confidence_threshold = config.pseudo_label_threshold;
    cot_cfg.synonymy_threshold = config.synonymy_threshold;
    cot_cfg.with_disclaimer = config.with_disclaimer;
    cot_cfg.retrieve_limit = config.retrieve_limit;
    for_each_question(report, variants, [&](const DatasetItem& item, QuestionResult& result) {
        Question q = canonicalize(item.text, item.id);
        try {
            DpCotResult dp =
                fed_dp_cot(q, *scratch.store, config.paths, backend, engine_cfg, cot_cfg);
            result.method = dp.method;
            if (dp.fallback_vote) result.confidence = dp.fallback_vote->confidence;
            if (config.capture_prompts && dp.prompt) result.prompt = dp.prompt->rendered;
            result.predicted = dp.answer.value;
            result.correct = answers_equal(dp.answer, item.gold);
        } catch (const NoAnswerFound&) {
            result.method = "fed-dp-cot";
        } catch (const AllPathsFailed&) {
            result.method = "fed-sp-sc";
        }
    });
    finalize(report);
    return report;
}

}  // namespace

std::vector<DatasetItem> load_dataset(const std::filesystem::path& path,
                                      GoldFormat format) {
    if (!std::filesystem::exists(path)) {
        throw FileMissing("dataset not found: " + path.string());
    }
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open dataset: " + path.string());

    std::vector<DatasetItem> items;
    auto add_gsm8k = [&](const nlohmann::json& j, std::size_t line_no) {
        DatasetItem item;
        item.id = "q" + std::to_string(items.size() + 1);
        item.text = j.at("question").get<std::string>();
        try {
            item.gold = extract_gold(j.at("answer").get<std::string>(), GoldFormat::Gsm8k);
        } catch (const MalformedGold& e) {
            throw MalformedGold(path.string() + " line " + std::to_string(line_no) +
                                ": " + e.what());
        }
        items.push_back(std::move(item));
    };
    auto add_svamp = [&](const nlohmann::json& j, std::size_t record_no) {
        DatasetItem item;
        item.id = "q" + std::to_string(items.size() + 1);
        item.text = j.at("Body").get<std::string>() + " " +
                    j.at("Question").get<std::string>();
        try {
            item.gold =
                extract_gold(json_answer_to_string(j.at("Answer")), GoldFormat::Svamp);
        } catch (const MalformedGold& e) {
            throw MalformedGold(path.string() + " record " + std::to_string(record_no) +
                                ": " + e.what());
        }
        items.push_back(std::move(item));
    };

    if (format == GoldFormat::Svamp) {
        // svamp ships as a JSON array; line-delimited records also accepted
        char first = 0;
        in >> std::ws;
        first = static_cast<char>(in.peek());
        if (first == '[') {
            nlohmann::json arr;
            try {
                in >> arr;
            } catch (const nlohmann::json::exception& e) {
                throw MalformedGold(path.string() + ": " + e.what());
            }
            std::size_t record_no = 0;
            for (const auto& j : arr) add_svamp(j, ++record_no);
            return items;
        }
    }

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedGold(path.string() + " line " + std::to_string(line_no) +
                                ": " + e.what());
        }
        if (format == GoldFormat::Gsm8k) {
            add_gsm8k(j, line_no);
        } else {
            add_svamp(j, line_no);
        }
    }
    return items;
}

EvalReport run_method(const std::vector<DatasetItem>& items,
                      const std::string& dataset_name, const EvalConfig& config,
                      Backend& backend) {
    if (items.empty()) throw ConfigError("dataset is empty");
    std::vector<DatasetItem> subset = limited(items, config.limit);
    RetryingBackend retrying(backend, config.retry_attempts,
                             std::chrono::milliseconds(config.retry_base_delay_ms));
    switch (config.method) {
        case EvalMethod::ZeroShotCot:
            return run_zero_shot(subset, dataset_name, config, retrying);
        case EvalMethod::FedSpSc:
            return run_fed_sp_sc(subset, dataset_name, config, retrying);
        case EvalMethod::FedDpCot:
            return run_fed_dp_cot(subset, dataset_name, config, retrying);
    }
    throw ConfigError("unknown eval method");
}

std::vector<EvalReport> run_paths_ablation(const std::vector<DatasetItem>& items,
                                           const std::string& dataset_name,
                                           const std::vector<int>& paths_list,
                                           EvalConfig config, Backend& backend) {
    std::vector<EvalReport> reports;
    reports.reserve(paths_list.size());
    for (int paths : paths_list) {
        if (paths < 1) throw ConfigError("paths values must be >= 1");
        EvalConfig run_config = config;
        run_config.method = EvalMethod::FedSpSc;
        run_config.paths = paths;
        reports.push_back(run_method(items, dataset_name, run_config, backend));
    }
    return reports;
}

std::pair<EvalReport, EvalReport> run_disclaimer_ablation(
    const std::vector<DatasetItem>& items, const std::string& dataset_name,
    EvalConfig config, Backend& backend) {
    config.method = EvalMethod::FedDpCot;
    config.capture_prompts = true;
    EvalConfig with_cfg = config;
    with_cfg.with_disclaimer = true;
    EvalConfig without_cfg = config;
    without_cfg.with_disclaimer = false;
    return {run_method(items, dataset_name, with_cfg, backend),
            run_method(items, dataset_name, without_cfg, backend)};
}

std::string report_to_string(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& r : report.records) {
        ordered_json j;
        j["type"] = "question";
        j["id"] = r.id;
        j["gold"] = r.gold;
        if (r.predicted) j["predicted"] = *r.predicted;
        else j["predicted"] = nullptr;
        j["correct"] = r.correct;
        j["evaluated"] = r.evaluated;
        j["method"] = r.method;
        if (r.confidence) j["confidence"] = *r.confidence;
        if (r.prompt) j["prompt"] = *r.prompt;
        out << j.dump() << '\n';
    }
    ordered_json summary;
    summary["type"] = "summary";
    summary["dataset"] = report.dataset;
    summary["method"] = report.method;
    summary["n_questions"] = report.n_questions;
    summary["n_correct"] = report.n_correct;
    summary["n_evaluated"] = report.n_evaluated;
    summary["accuracy"] = report.accuracy;
    summary["aborted"] = report.aborted;
    summary["config"] = nlohmann::ordered_json::parse(report.config_json);
    out << summary.dump() << '\n';
    return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write report: " + path.string());
    out << report_to_string(report);
    if (!out) throw IoFailure("failed writing report: " + path.string());
}

const char* to_string(EvalMethod method) {
    switch (method) {
        case EvalMethod::ZeroShotCot: return "zero-shot-cot";
        case EvalMethod::FedSpSc: return "fed-sp-sc";
        case EvalMethod::FedDpCot: return "fed-dp-cot";
    }
    return "zero-shot-cot";
}

EvalMethod eval_method_from_string(const std::string& name) {
    if (name == "zero-shot-cot") return EvalMethod::ZeroShotCot;
    if (name == "fed-sp-sc") return EvalMethod::FedSpSc;
    if (name == "fed-dp-cot") return EvalMethod::FedDpCot;
    throw ConfigError("unknown method: " + name +
                      " (expected zero-shot-cot, fed-sp-sc or fed-dp-cot)");
}

}  // namespace fedqa
