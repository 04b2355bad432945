#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedqa/backend.hpp"
#include "fedqa/question.hpp"

namespace fedqa {

// One scripted behavior, keyed by question skeleton. The oracle answers any
// question whose skeleton contains the entry's skeleton, so rephrased forms
// of a scripted question resolve to the same entry.
struct OracleEntry {
    std::string skeleton;
    std::string correct_answer;
    double correct_prob = 1.0;
    std::vector<std::string> wrong_answers;
    // Probability used when the prompt carries a CoT exemplar block; lets a
    // script make the bare question fail while the prefixed one succeeds.
    // Negative means "same as correct_prob".
    double correct_prob_with_cot = -1.0;
};

class OracleScript {
public:
    OracleScript() = default;
    explicit OracleScript(std::vector<OracleEntry> entries);

    // Line-delimited JSON, one entry per line: {"skeleton": ...,
    // "correct_answer": ..., "correct_prob": ..., "wrong_answers": [...],
    // "correct_prob_with_cot": ...} (last field optional).
    static OracleScript load(const std::filesystem::path& path);

    void add(OracleEntry entry);

    // Exact skeleton match first, then the longest scripted skeleton that is
    // a substring of `skeleton` (ties broken lexicographically). Null when
    // nothing matches.
    const OracleEntry* find(const std::string& skeleton) const;

    std::size_t size() const { return entries_.size(); }

private:
    std::vector<OracleEntry> entries_;
};

// Deterministic seeded stand-in for a live model. Understands three prompt
// shapes: "Rephrase in k ways: ..." (emits a numbered list of skeleton-
// preserving rewordings), plain questions with the zero-shot suffix (emits a
// templated reasoning paragraph ending in the drawn answer), and CoT
// prompts (answers the trailing query line). Every draw is a pure function
// of (seed, sample index, skeleton), so identical requests are byte-identical.
class OracleBackend : public Backend {
public:
    explicit OracleBackend(OracleScript script, std::uint64_t default_seed = 0);

    std::vector<std::string> complete(const CompletionRequest& req) override;
    std::string kind() const override { return "oracle"; }

    const OracleScript& script() const { return script_; }

private:
    std::string answer_one(const std::string& question_text,
                           std::uint64_t seed, int sample_index, bool has_cot);

    OracleScript script_;
    std::uint64_t default_seed_;
};

// Rewording templates used for "Rephrase in k ways" prompts. Exposed so
// tests can reason about the produced skeletons. None contain digits, so
// every rewording preserves the original parameter list.
const std::vector<std::string>& oracle_rephrase_templates();

}  // namespace fedqa
