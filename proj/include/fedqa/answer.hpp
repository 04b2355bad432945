#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fedqa {

// A final answer in canonical decimal form: no thousands separators, no
// leading zeros, no trailing fractional zeros, optional leading minus.
struct NormalizedAnswer {
    std::string value;
    std::string raw_span;  // source substring the value was extracted from
};

enum class GoldFormat { Gsm8k, Svamp };

// Canonical decimal text for a number token ("1,234.50" -> "1234.5").
// Idempotent: normalize_number(normalize_number(x)) == normalize_number(x).
std::string normalize_number(std::string_view token);

// Returns the last number token in the completion, normalized. Chain-of-
// thought completions state their conclusion last, so the last number wins.
// Throws NoAnswerFound when the text contains no number token.
NormalizedAnswer extract_answer(std::string_view completion);

// Same as extract_answer but reports failure as nullopt instead of throwing.
std::optional<NormalizedAnswer> try_extract_answer(std::string_view completion);

// Gold labels: gsm8k takes the number after the final "####" marker, svamp
// parses the label itself. Throws MalformedGold.
NormalizedAnswer extract_gold(std::string_view label, GoldFormat format);

// Exact equality of canonical decimal texts ("20" == normalized "20.0").
bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b);

}  // namespace fedqa
