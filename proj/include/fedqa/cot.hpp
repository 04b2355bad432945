#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedqa/consistency.hpp"
#include "fedqa/store.hpp"

namespace fedqa {

// The fixed warning appended after the exemplar block, byte-exact including
// the space before the comma and the trailing space.
inline constexpr std::string_view kDisclaimer =
    "The examples given above may contain errors , please think more carefully. ";

inline constexpr double kDefaultPseudoLabelThreshold = 0.6;

// A pseudo-labeled question eligible as a CoT exemplar for the current query.
struct Exemplar {
    std::string question_text;
    NormalizedAnswer answer;
    double confidence = 0.0;  // vote fraction of the originating record
    double similarity = 0.0;  // similarity to the current query
};

// An assembled few-shot prompt. rendered is always
// exemplar_block + disclaimer + "\n" + query + "\nLet's think step by step."
struct CoTPrompt {
    std::string exemplar_block;
    std::string disclaimer;
    std::string query;
    std::string rendered;
};

// Filters candidates to DP relation with the query at confidence >=
// confidence_threshold, keeps the top-k by similarity, and returns them in
// ascending similarity order so the most similar exemplar sits nearest the
// query. Throws NoExemplars when the filter empties the list.
std::vector<Exemplar> select_exemplars(
    const Question& query,
    std::span<const std::pair<PseudoLabelRecord, PairRelation>> candidates,
    int k, double confidence_threshold = kDefaultPseudoLabelThreshold);

// Pure template rendering; identical inputs yield byte-identical prompts.
// Each exemplar contributes "Q: {text}\nA: {answer}\n\n".
CoTPrompt compose(const Question& query, std::span<const Exemplar> exemplars,
                  bool with_disclaimer = true);

struct CotConfig {
    int exemplars_k = 4;
    double confidence_threshold = kDefaultPseudoLabelThreshold;
    double synonymy_threshold = kDefaultSynonymyThreshold;
    bool with_disclaimer = true;  // worth ~2% on noisy exemplars
    int retrieve_limit = 16;
};

struct DpCotResult {
    NormalizedAnswer answer;
    std::optional<CoTPrompt> prompt;           // absent when fallback ran
    std::string method;                        // "fed-dp-cot" or "fed-sp-sc"
    std::optional<VoteOutcome> fallback_vote;  // present when fallback ran
    int exemplar_count = 0;
};

// The federated different-parameter flow: retrieve DP pseudo-labels, compose
// the disclaimed prompt, take a single temperature-0 completion. Falls back
// to fed_sp_sc with paths_fallback paths when no exemplar qualifies.
DpCotResult fed_dp_cot(const Question& query, const QuestionStore& store,
                       int paths_fallback, Backend& backend,
                       const EngineConfig& engine_cfg = {},
                       const CotConfig& cot_cfg = {});

}  // namespace fedqa
