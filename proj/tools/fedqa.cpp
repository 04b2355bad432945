// fedqa: federated question-answering gateway and evaluation CLI.
//
//   fedqa serve --config gateway.conf
//   fedqa ask "QUESTION" --backend oracle --oracle-script script.jsonl
//   fedqa eval --dataset gsm8k.jsonl --format gsm8k --method fed-sp-sc --report out.jsonl
//   fedqa ablate-paths --dataset ... --paths 1,3,5,7,9
//   fedqa ablate-disclaimer --dataset ...

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedqa/config.hpp"
#include "fedqa/errors.hpp"
#include "fedqa/eval.hpp"
#include "fedqa/gateway.hpp"
#include "fedqa/http_backend.hpp"
#include "fedqa/oracle.hpp"
#include "fedqa/store.hpp"

namespace {

using fedqa::AppConfig;

// Flag values overlay the config file, which overlays built-in defaults.
struct CommonFlags {
    std::string config_path;
    std::optional<std::string> listen, store, backend, base_url, model, api_key_env,
        oracle_script;
    std::optional<int> paths, exemplars, retrieve_limit, max_tokens, timeout_s;
    std::optional<double> synonymy_threshold, pseudo_label_threshold, cache_threshold,
        temperature;
    std::optional<std::uint64_t> seed;

    void wire(CLI::App* cmd, bool with_paths = true) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--listen", listen, "listen address host:port");
        cmd->add_option("--store", store, "store file path");
        cmd->add_option("--backend", backend, "completion backend: oracle | http");
        cmd->add_option("--base-url", base_url, "OpenAI-compatible endpoint base URL");
        cmd->add_option("--model", model, "model name sent to the endpoint");
        cmd->add_option("--api-key-env", api_key_env,
                        "environment variable holding the API key");
        cmd->add_option("--oracle-script", oracle_script, "oracle script file (jsonl)");
        if (with_paths) cmd->add_option("--paths", paths, "reasoning paths for self-consistency");
        cmd->add_option("--exemplars", exemplars, "CoT exemplar count");
        cmd->add_option("--retrieve-limit", retrieve_limit, "max retrieval hits");
        cmd->add_option("--max-tokens", max_tokens, "completion token budget");
        cmd->add_option("--timeout-s", timeout_s, "per-request timeout, seconds");
        cmd->add_option("--synonymy-threshold", synonymy_threshold,
                        "similarity bar for SP/DP matching");
        cmd->add_option("--pseudo-label-threshold", pseudo_label_threshold,
                        "confidence bar for CoT exemplars");
        cmd->add_option("--cache-threshold", cache_threshold,
                        "confidence bar for serving from cache");
        cmd->add_option("--temperature", temperature, "sampling temperature");
        cmd->add_option("--seed", seed, "seed for the oracle backend");
    }

    AppConfig resolve() const {
        AppConfig cfg;
        if (!config_path.empty()) cfg = fedqa::load_config_file(config_path, cfg);
        auto over = [](auto& slot, const auto& flag) {
            if (flag) slot = *flag;
        };
        over(cfg.listen, listen);
        over(cfg.store_path, store);
        over(cfg.base_url, base_url);
        over(cfg.model, model);
        over(cfg.api_key_env, api_key_env);
        over(cfg.oracle_script, oracle_script);
        over(cfg.paths, paths);
        over(cfg.exemplars, exemplars);
        over(cfg.retrieve_limit, retrieve_limit);
        over(cfg.max_tokens, max_tokens);
        over(cfg.timeout_s, timeout_s);
        over(cfg.synonymy_threshold, synonymy_threshold);
        over(cfg.pseudo_label_threshold, pseudo_label_threshold);
        over(cfg.cache_threshold, cache_threshold);
        over(cfg.temperature, temperature);
        over(cfg.seed, seed);
        if (backend) cfg.set("backend", *backend);
        return cfg;
    }
};

struct BackendBundle {
    std::shared_ptr<fedqa::Backend> backend;
    std::optional<fedqa::OracleScript> script;  // kept alive for eval runs
};

BackendBundle make_backend(const AppConfig& cfg) {
    BackendBundle bundle;
    if (cfg.backend == "oracle") {
        fedqa::OracleScript script;
        if (!cfg.oracle_script.empty()) {
            script = fedqa::OracleScript::load(cfg.oracle_script);
        }
        bundle.script = script;
        bundle.backend = std::make_shared<fedqa::OracleBackend>(std::move(script), cfg.seed);
        return bundle;
    }
    fedqa::HttpBackendConfig http_cfg;
    http_cfg.base_url = cfg.base_url;
    http_cfg.model = cfg.model;
    http_cfg.api_key_env = cfg.api_key_env;
    http_cfg.timeout_s = cfg.timeout_s;
    bundle.backend = std::make_shared<fedqa::HttpBackend>(http_cfg);
    return bundle;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    std::size_t colon = listen.rfind(':');
    if (colon == std::string::npos) return {listen, 8080};
    try {
        return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
        throw fedqa::ConfigError("listen address needs a numeric port: " + listen);
    }
}

nlohmann::ordered_json response_json(const fedqa::QueryResponse& r) {
    nlohmann::ordered_json j;
    j["answer"] = r.answer.value;
    j["method"] = r.method;
    if (r.confidence) j["confidence"] = *r.confidence;
    j["n_paths"] = r.n_paths;
    j["exemplar_count"] = r.exemplar_count;
    j["request_id"] = r.request_id;
    return j;
}

std::string dataset_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

fedqa::GoldFormat parse_format(const std::string& name) {
    if (name == "gsm8k") return fedqa::GoldFormat::Gsm8k;
    if (name == "svamp") return fedqa::GoldFormat::Svamp;
    throw fedqa::ConfigError("unknown dataset format: " + name);
}

void print_summary(const fedqa::EvalReport& report, const std::string& report_path) {
    std::printf("dataset=%s method=%s n=%d correct=%d accuracy=%.4f%s report=%s\n",
                report.dataset.c_str(), report.method.c_str(), report.n_questions,
                report.n_correct, report.accuracy, report.aborted ? " (aborted)" : "",
                report_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated question-answering gateway"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP gateway");
    CommonFlags serve_flags;
    serve_flags.wire(serve);

    // ask
    auto* ask = app.add_subcommand("ask", "one-shot query through the full pipeline");
    CommonFlags ask_flags;
    ask_flags.wire(ask);
    std::string ask_question;
    ask->add_option("question", ask_question, "question text")->required();

    // eval + ablations share flags
    struct EvalFlags {
        CommonFlags common;
        std::string dataset;
        std::string format = "gsm8k";
        std::string method = "zero-shot-cot";
        std::string report = "report.jsonl";
        std::string variants;
        int limit = 0;
        bool capture_prompts = false;
        bool with_disclaimer = true;

        void wire(CLI::App* cmd, bool with_method, bool with_paths = true) {
            common.wire(cmd, with_paths);
            cmd->add_option("--dataset", dataset, "dataset file")->required();
            cmd->add_option("--format", format, "gsm8k | svamp");
            if (with_method) {
                cmd->add_option("--method", method,
                                "zero-shot-cot | fed-sp-sc | fed-dp-cot");
            }
            cmd->add_option("--limit", limit, "evaluate at most N questions (0 = all)");
            cmd->add_option("--report", report, "report output path (or prefix)");
            cmd->add_option("--variants", variants,
                            "curated variant dataset for fed-dp-cot");
            cmd->add_flag("--capture-prompts", capture_prompts,
                          "embed rendered prompts in the report");
            cmd->add_flag("--disclaimer,!--no-disclaimer", with_disclaimer,
                          "include the exemplar error disclaimer");
        }

        fedqa::EvalConfig resolve(const AppConfig& cfg,
                                  const fedqa::OracleScript* script) const {
            fedqa::EvalConfig ec;
            ec.method = fedqa::eval_method_from_string(method);
            ec.format = parse_format(format);
            ec.paths = cfg.paths;
            ec.exemplars = cfg.exemplars;
            ec.limit = limit;
            ec.seed = cfg.seed;
            ec.temperature = cfg.temperature;
            ec.max_tokens = cfg.max_tokens;
            ec.with_disclaimer = with_disclaimer;
            ec.synonymy_threshold = cfg.synonymy_threshold;
            ec.pseudo_label_threshold = cfg.pseudo_label_threshold;
            ec.retrieve_limit = cfg.retrieve_limit;
            ec.capture_prompts = capture_prompts;
            ec.variants_path = variants;
            ec.oracle_script = script;
            return ec;
        }
    };

    auto* eval = app.add_subcommand("eval", "run an evaluation method over a dataset");
    EvalFlags eval_flags;
    eval_flags.wire(eval, true);

    auto* ablate_paths = app.add_subcommand("ablate-paths",
                                            "sweep reasoning-path counts for fed-sp-sc");
    EvalFlags ablate_paths_flags;
    ablate_paths_flags.wire(ablate_paths, /*with_method=*/false, /*with_paths=*/false);
    std::vector<int> paths_list{1, 3, 5};
    ablate_paths->add_option("--paths", paths_list, "comma-separated path counts")
        ->delimiter(',');

    auto* ablate_disclaimer = app.add_subcommand(
        "ablate-disclaimer", "fed-dp-cot with and without the error disclaimer");
    EvalFlags ablate_disclaimer_flags;
    ablate_disclaimer_flags.wire(ablate_disclaimer, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) {
            AppConfig cfg = serve_flags.resolve();
            auto bundle = make_backend(cfg);
            fedqa::QuestionStore store(cfg.store_path);
            fedqa::Gateway gateway(cfg, bundle.backend, store);
            auto [host, port] = split_listen(cfg.listen);
            fedqa::GatewayServer server(gateway, host, port);
            std::fprintf(stderr, "fedqa: listening on %s:%d, backend=%s, store=%s (%zu records)\n",
                         host.c_str(), port, bundle.backend->kind().c_str(),
                         cfg.store_path.c_str(), store.size());
            server.listen();
            return 0;
        }

        if (ask->parsed()) {
            AppConfig cfg = ask_flags.resolve();
            auto bundle = make_backend(cfg);
            fedqa::QuestionStore store(cfg.store_path);
            fedqa::Gateway gateway(cfg, bundle.backend, store);
            auto response = gateway.handle_query(ask_question);
            std::cout << response_json(response).dump(2) << "\n";
            return 0;
        }

        if (eval->parsed()) {
            AppConfig cfg = eval_flags.common.resolve();
            auto bundle = make_backend(cfg);
            auto items = fedqa::load_dataset(eval_flags.dataset,
                                             parse_format(eval_flags.format));
            auto ec = eval_flags.resolve(cfg, bundle.script ? &*bundle.script : nullptr);
            auto report = fedqa::run_method(items, dataset_stem(eval_flags.dataset), ec,
                                            *bundle.backend);
            fedqa::write_report(report, eval_flags.report);
            print_summary(report, eval_flags.report);
            return report.aborted ? 2 : 0;
        }

        if (ablate_paths->parsed()) {
            AppConfig cfg = ablate_paths_flags.common.resolve();
            auto bundle = make_backend(cfg);
            auto items = fedqa::load_dataset(ablate_paths_flags.dataset,
                                             parse_format(ablate_paths_flags.format));
            auto ec = ablate_paths_flags.resolve(cfg, bundle.script ? &*bundle.script : nullptr);
            auto reports = fedqa::run_paths_ablation(
                items, dataset_stem(ablate_paths_flags.dataset), paths_list, ec,
                *bundle.backend);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                std::string path = ablate_paths_flags.report + "-paths" +
                                   std::to_string(paths_list[i]) + ".jsonl";
                fedqa::write_report(reports[i], path);
                std::printf("paths=%d accuracy=%.4f report=%s\n", paths_list[i],
                            reports[i].accuracy, path.c_str());
            }
            return 0;
        }

        if (ablate_disclaimer->parsed()) {
            AppConfig cfg = ablate_disclaimer_flags.common.resolve();
            auto bundle = make_backend(cfg);
            auto items = fedqa::load_dataset(ablate_disclaimer_flags.dataset,
                                             parse_format(ablate_disclaimer_flags.format));
            auto ec = ablate_disclaimer_flags.resolve(
                cfg, bundle.script ? &*bundle.script : nullptr);
            auto [with_report, without_report] = fedqa::run_disclaimer_ablation(
                items, dataset_stem(ablate_disclaimer_flags.dataset), ec, *bundle.backend);
            std::string with_path = ablate_disclaimer_flags.report + "-with-disclaimer.jsonl";
            std::string without_path =
                ablate_disclaimer_flags.report + "-without-disclaimer.jsonl";
            fedqa::write_report(with_report, with_path);
            fedqa::write_report(without_report, without_path);
            std::printf("disclaimer=on accuracy=%.4f report=%s\n", with_report.accuracy,
                        with_path.c_str());
            std::printf("disclaimer=off accuracy=%.4f report=%s\n", without_report.accuracy,
                        without_path.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fedqa: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
