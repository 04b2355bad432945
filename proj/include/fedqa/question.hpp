#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fedqa {

// Placeholder substituted for every number in a question skeleton.
inline constexpr std::string_view kNumPlaceholder = "<num>";

// Default similarity threshold above which two skeletons count as synonymous.
inline constexpr double kDefaultSynonymyThreshold = 0.15;

// A user question in canonical form. `skeleton` is the normalized text with
// every number replaced by kNumPlaceholder; `params` holds the number tokens
// in reading order, exactly as they appear in the normalized text.
struct Question {
    std::string id;
    std::string text;
    std::string skeleton;
    std::vector<std::string> params;
};

enum class PairKind { SP, DP, Unrelated };

struct PairRelation {
    PairKind kind = PairKind::Unrelated;
    double similarity = 0.0;
};

// Normalizes question text: lowercase, punctuation stripped (decimal points
// inside numbers survive), comma-grouped digits collapsed, basic cardinal
// words mapped to digits, whitespace runs collapsed. Numbers become
// placeholders in the skeleton and are collected into params.
// Throws EmptyQuestion when the text is empty or whitespace-only.
// Pure: identical input yields byte-identical output.
Question canonicalize(std::string_view text, std::string id = {});

// Jaccard coefficient over the word-level trigram sets of the two skeletons.
// Identical skeletons score 1.0; symmetric.
double similarity(const Question& a, const Question& b);

// SP when similar and the param multisets agree (compared by numeric value),
// DP when similar but parameters differ, Unrelated below the threshold.
PairRelation classify_pair(const Question& a, const Question& b,
                           double threshold = kDefaultSynonymyThreshold);

// True when the two param multisets agree by numeric value.
bool same_params(const Question& a, const Question& b);

const char* to_string(PairKind kind);

}  // namespace fedqa
