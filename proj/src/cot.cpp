#include "fedqa/cot.hpp"

#include <algorithm>
#include <stdexcept>

#include "fedqa/errors.hpp"

namespace fedqa {

std::vector<Exemplar> select_exemplars(
    const Question& query,
    std::span<const std::pair<PseudoLabelRecord, PairRelation>> candidates,
    int k, double confidence_threshold) {
    if (k < 1) throw std::invalid_argument("exemplar count must be >= 1");
    if (!(confidence_threshold > 0.0 && confidence_threshold <= 1.0)) {
        throw std::invalid_argument("confidence threshold must be in (0,1]");
    }

    std::vector<Exemplar> pool;
    for (const auto& [record, rel] : candidates) {
        // SP candidates belong to the voting path, not the exemplar block.
        if (rel.kind != PairKind::DP) continue;
        if (record.confidence < confidence_threshold) continue;
        pool.push_back({record.question.text, record.answer, record.confidence,
                        rel.similarity});
    }
    if (pool.empty()) {
        throw NoExemplars("no DP pseudo-label at or above the confidence threshold for query " +
                          query.id);
    }
    std::stable_sort(pool.begin(), pool.end(), [](const Exemplar& a, const Exemplar& b) {
        return a.similarity > b.similarity;
    });
    if (static_cast<int>(pool.size()) > k) pool.resize(static_cast<std::size_t>(k));
    // Ascending similarity: the most similar exemplar ends up nearest the query.
    std::reverse(pool.begin(), pool.end());
    return pool;
}

CoTPrompt compose(const Question& query, std::span<const Exemplar> exemplars,
                  bool with_disclaimer) {
    if (exemplars.empty()) {
        throw std::invalid_argument("compose requires at least one exemplar");
    }
    CoTPrompt prompt;
    for (const auto& exemplar : exemplars) {
        prompt.exemplar_block +=
            "Q: " + exemplar.question_text + "\nA: " + exemplar.answer.value + "\n\n";
    }
    if (with_disclaimer) prompt.disclaimer = std::string(kDisclaimer);
    prompt.query = query.text;
    prompt.rendered = prompt.exemplar_block + prompt.disclaimer + "\n" + prompt.query +
                      std::string(kZeroShotSuffix);
    return prompt;
}

DpCotResult fed_dp_cot(const Question& query, const QuestionStore& store,
                       int paths_fallback, Backend& backend,
                       const EngineConfig& engine_cfg, const CotConfig& cot_cfg) {
    auto candidates =
        store.retrieve(query, cot_cfg.retrieve_limit, cot_cfg.synonymy_threshold);
    std::vector<Exemplar> exemplars;
    try {
        exemplars = select_exemplars(query, candidates, cot_cfg.exemplars_k,
                                     cot_cfg.confidence_threshold);
    } catch (const NoExemplars&) {
        auto sp = fed_sp_sc(query, {}, paths_fallback, backend, engine_cfg);
        DpCotResult result;
        result.answer = sp.vote.winner;
        result.method = "fed-sp-sc";
        result.fallback_vote = sp.vote;
        return result;
    }

    CoTPrompt prompt = compose(query, exemplars, cot_cfg.with_disclaimer);
    CompletionRequest req;
    req.prompt = prompt.rendered;
    req.temperature = 0.0;  // single greedy pass over the prefixed prompt
    req.max_tokens = engine_cfg.max_tokens;
    req.n_samples = 1;
    req.seed = engine_cfg.seed;
    std::string completion = backend.complete(req).at(0);

    DpCotResult result;
    result.answer = extract_answer(completion);
    result.prompt = std::move(prompt);
    result.method = "fed-dp-cot";
    result.exemplar_count = static_cast<int>(exemplars.size());
    return result;
}

}  // namespace fedqa
