#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedqa/answer.hpp"
#include "fedqa/backend.hpp"
#include "fedqa/question.hpp"

namespace fedqa {

// Sampling knobs shared by the consistency and CoT flows.
struct EngineConfig {
    double temperature = 0.7;  // multi-path sampling needs diverse paths
    int max_tokens = 256;
    std::uint64_t seed = 0;
};

// One reasoning path: the question it came from, the raw completion, and the
// extracted answer (absent when extraction failed).
struct AnswerSample {
    Question source_question;
    std::string completion;
    std::optional<NormalizedAnswer> answer;
};

// Result of majority voting over answer samples.
struct VoteOutcome {
    NormalizedAnswer winner;
    std::vector<std::pair<NormalizedAnswer, int>> tallies;  // first-seen order
    int n_paths = 0;      // all samples, including extraction failures
    double confidence = 0.0;  // winner tally / n_paths
};

// Asks the backend to reword the question k times using the literal
// "Rephrase in k ways: " prompt, parses the numbered or bulleted list, and
// drops any rewording whose parameter multiset differs from the original
// (those silently change the problem). Throws RephraseParseFailure when no
// line parses at all.
std::vector<Question> generate_rephrasings(const Question& q, int k,
                                           Backend& backend,
                                           const EngineConfig& cfg = {});

// One zero-shot-CoT path: question text + "\nLet's think step by step.",
// one sampled completion. Extraction failure is recorded in the sample, not
// thrown.
AnswerSample answer_one_path(const Question& q, Backend& backend,
                             const EngineConfig& cfg = {});

// Most-voted answer across samples. Extraction failures are excluded from
// the tallies but still count toward n_paths. Ties go to the answer produced
// by the lowest-index sample. Throws AllPathsFailed when nothing extracted.
VoteOutcome majority_vote(std::span<const AnswerSample> samples);

struct SpScResult {
    VoteOutcome vote;
    std::vector<AnswerSample> samples;
};

// The federated same-parameter flow: builds a path set of exactly `paths`
// questions ([q] + peers, topped up with fresh rephrasings and, when those
// run short, repeated sampling of existing paths), answers each, and votes.
SpScResult fed_sp_sc(const Question& q, std::span<const Question> sp_peers,
                     int paths, Backend& backend, const EngineConfig& cfg = {});

// The zero-shot prompt suffix, verbatim.
inline constexpr std::string_view kZeroShotSuffix = "\nLet's think step by step.";

// Prompt prefix for k rewordings ("Rephrase in 4 ways: " for k=4).
std::string rephrase_prompt(const Question& q, int k);

}  // namespace fedqa
