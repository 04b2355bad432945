#include "fedqa/answer.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct NumberToken {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past
};

// Finds the next maximal number token at or after `from`: optional minus
// (only when not preceded by a digit), digits with thousands groups, optional
// fraction. Returns false when the text holds no further number.
bool next_number_token(std::string_view text, std::size_t from, NumberToken& tok) {
    for (std::size_t i = from; i < text.size(); ++i) {
        if (!is_digit(text[i])) continue;

        std::size_t begin = i;
        if (i > 0 && text[i - 1] == '-' && (i < 2 || !is_digit(text[i - 2]))) {
            begin = i - 1;
        }
        std::size_t j = i;
        while (j < text.size() && is_digit(text[j])) ++j;
        // thousands groups: ",ddd" not followed by a fourth digit
        while (j < text.size() && text[j] == ',' && j + 3 < text.size() &&
               is_digit(text[j + 1]) && is_digit(text[j + 2]) &&
               is_digit(text[j + 3]) &&
               (j + 4 >= text.size() || !is_digit(text[j + 4]))) {
            j += 4;
        }
        if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
            is_digit(text[j + 1])) {
            ++j;
            while (j < text.size() && is_digit(text[j])) ++j;
        }
        tok.begin = begin;
        tok.end = j;
        return true;
    }
    return false;
}

}  // namespace

std::string normalize_number(std::string_view token) {
    std::string digits;
    digits.reserve(token.size());
    bool negative = false;
    std::size_t i = 0;
    while (i < token.size() && !is_digit(token[i]) && token[i] != '-') ++i;
    if (i < token.size() && token[i] == '-') {
        negative = true;
        ++i;
    }
    std::string int_part, frac_part;
    while (i < token.size() && (is_digit(token[i]) || token[i] == ',')) {
        if (token[i] != ',') int_part.push_back(token[i]);
        ++i;
    }
    if (i < token.size() && token[i] == '.') {
        ++i;
        while (i < token.size() && is_digit(token[i])) {
            frac_part.push_back(token[i]);
            ++i;
        }
    }
    if (int_part.empty() && frac_part.empty()) return {};

    std::size_t nz = int_part.find_first_not_of('0');
    int_part = nz == std::string::npos ? "0" : int_part.substr(nz);
    std::size_t fz = frac_part.find_last_not_of('0');
    frac_part = fz == std::string::npos ? "" : frac_part.substr(0, fz + 1);
    if (int_part.empty()) int_part = "0";
    if (negative && int_part == "0" && frac_part.empty()) negative = false;

    std::string out;
    if (negative) out.push_back('-');
    out += int_part;
    if (!frac_part.empty()) {
        out.push_back('.');
        out += frac_part;
    }
    return out;
}

std::optional<NormalizedAnswer> try_extract_answer(std::string_view completion) {
    NumberToken tok;
    bool found = false;
    NumberToken last;
    std::size_t pos = 0;
    while (next_number_token(completion, pos, tok)) {
        last = tok;
        found = true;
        pos = tok.end;
    }
    if (!found) return std::nullopt;
    NormalizedAnswer ans;
    ans.raw_span = std::string(completion.substr(last.begin, last.end - last.begin));
    ans.value = normalize_number(ans.raw_span);
    return ans;
}

NormalizedAnswer extract_answer(std::string_view completion) {
    auto ans = try_extract_answer(completion);
    if (!ans) throw NoAnswerFound("completion contains no number token");
    return *ans;
}

NormalizedAnswer extract_gold(std::string_view label, GoldFormat format) {
    if (format == GoldFormat::Gsm8k) {
        std::size_t marker = label.rfind("####");
        if (marker == std::string_view::npos) {
            throw MalformedGold("gsm8k label lacks the #### marker");
        }
        std::string_view tail = label.substr(marker + 4);
        NumberToken tok;
        if (!next_number_token(tail, 0, tok)) {
            throw MalformedGold("gsm8k label has no number after ####");
        }
        NormalizedAnswer ans;
        ans.raw_span = std::string(tail.substr(tok.begin, tok.end - tok.begin));
        ans.value = normalize_number(ans.raw_span);
        return ans;
    }

    // svamp: the label is the number
    std::size_t begin = label.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) throw MalformedGold("svamp label is empty");
    std::size_t end = label.find_last_not_of(" \t\r\n");
    std::string_view trimmed = label.substr(begin, end - begin + 1);
    NumberToken tok;
    if (!next_number_token(trimmed, 0, tok) || tok.begin != 0 ||
        tok.end != trimmed.size()) {
        throw MalformedGold("svamp label is not a number: " + std::string(trimmed));
    }
    NormalizedAnswer ans;
    ans.raw_span = std::string(trimmed);
    ans.value = normalize_number(ans.raw_span);
    return ans;
}

bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b) {
    return a.value == b.value;
}

}  // namespace fedqa
