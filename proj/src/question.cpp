#include "fedqa/question.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fedqa/answer.hpp"
#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex12(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(12, '0');
    for (int i = 11; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

// Thousands separators: drop a comma sitting between a digit and a group of
// exactly three digits (1,234,567 -> 1234567; "32, 100" is untouched).
std::string collapse_digit_commas(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == ',' && i > 0 && is_digit(in[i - 1]) && i + 3 < in.size() &&
            is_digit(in[i + 1]) && is_digit(in[i + 2]) && is_digit(in[i + 3]) &&
            (i + 4 >= in.size() || !is_digit(in[i + 4]))) {
            continue;
        }
        out.push_back(in[i]);
    }
    return out;
}

// Single-token cardinals. Compounds ("twenty-five"), scales ("hundred") and
// multiplier words ("twice") stay as words.
const std::unordered_map<std::string, std::string>& cardinal_words() {
    static const std::unordered_map<std::string, std::string> map = {
        {"zero", "0"},     {"one", "1"},       {"two", "2"},
        {"three", "3"},    {"four", "4"},      {"five", "5"},
        {"six", "6"},      {"seven", "7"},     {"eight", "8"},
        {"nine", "9"},     {"ten", "10"},      {"eleven", "11"},
        {"twelve", "12"},  {"thirteen", "13"}, {"fourteen", "14"},
        {"fifteen", "15"}, {"sixteen", "16"},  {"seventeen", "17"},
        {"eighteen", "18"},{"nineteen", "19"}, {"twenty", "20"},
    };
    return map;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ') ++i;
        if (i > start) words.emplace_back(s.substr(start, i - start));
    }
    return words;
}

}  // namespace

Question canonicalize(std::string_view text, std::string id) {
    std::size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) {
        throw EmptyQuestion("question text is empty or whitespace-only");
    }
    std::size_t end = text.find_last_not_of(" \t\r\n");
    std::string_view trimmed = text.substr(begin, end - begin + 1);

    std::string lowered(trimmed);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    std::string collapsed = collapse_digit_commas(lowered);

    // Strip punctuation to spaces; a '.' survives only between two digits.
    std::string stripped;
    stripped.reserve(collapsed.size());
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        char c = collapsed[i];
        if (is_lower(c) || is_digit(c)) {
            stripped.push_back(c);
        } else if (c == '.' && i > 0 && is_digit(collapsed[i - 1]) &&
                   i + 1 < collapsed.size() && is_digit(collapsed[i + 1])) {
            stripped.push_back(c);
        } else {
            stripped.push_back(' ');
        }
    }

    std::vector<std::string> words = split_words(stripped);
    for (auto& w : words) {
        auto it = cardinal_words().find(w);
        if (it != cardinal_words().end()) w = it->second;
    }

    Question q;
    q.text = std::string(text);
    std::string normalized;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        if (wi > 0) normalized.push_back(' ');
        normalized += words[wi];
    }

    // Replace every maximal number token with the placeholder.
    std::string skeleton;
    skeleton.reserve(normalized.size());
    for (std::size_t i = 0; i < normalized.size();) {
        if (is_digit(normalized[i])) {
            std::size_t j = i;
            while (j < normalized.size() && is_digit(normalized[j])) ++j;
            if (j < normalized.size() && normalized[j] == '.' &&
                j + 1 < normalized.size() && is_digit(normalized[j + 1])) {
                ++j;
                while (j < normalized.size() && is_digit(normalized[j])) ++j;
            }
            q.params.emplace_back(normalized.substr(i, j - i));
            skeleton += kNumPlaceholder;
            i = j;
        } else {
            skeleton.push_back(normalized[i]);
            ++i;
        }
    }
    q.skeleton = std::move(skeleton);
    q.id = id.empty() ? "q" + hex12(fnv1a64(q.text)) : std::move(id);
    return q;
}

double similarity(const Question& a, const Question& b) {
    if (a.skeleton == b.skeleton) return 1.0;

    auto trigrams = [](const std::string& skeleton) {
        std::unordered_set<std::string> grams;
        std::vector<std::string> words = split_words(skeleton);
        for (std::size_t i = 0; i + 2 < words.size(); ++i) {
            grams.insert(words[i] + '\x1f' + words[i + 1] + '\x1f' + words[i + 2]);
        }
        return grams;
    };

    std::unordered_set<std::string> ga = trigrams(a.skeleton);
    std::unordered_set<std::string> gb = trigrams(b.skeleton);
    std::size_t inter = 0;
    for (const auto& g : ga) {
        if (gb.count(g)) ++inter;
    }
    std::size_t uni = ga.size() + gb.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

bool same_params(const Question& a, const Question& b) {
    auto values = [](const Question& q) {
        std::vector<std::string> v;
        v.reserve(q.params.size());
        for (const auto& p : q.params) v.push_back(normalize_number(p));
        std::sort(v.begin(), v.end());
        return v;
    };
    return values(a) == values(b);
}

PairRelation classify_pair(const Question& a, const Question& b, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("synonymy threshold must be in (0,1]");
    }
    PairRelation rel;
    rel.similarity = similarity(a, b);
    if (rel.similarity < threshold) {
        rel.kind = PairKind::Unrelated;
        return rel;
    }
    rel.kind = same_params(a, b) ? PairKind::SP : PairKind::DP;
    return rel;
}

const char* to_string(PairKind kind) {
    switch (kind) {
        case PairKind::SP: return "SP";
        case PairKind::DP: return "DP";
        case PairKind::Unrelated: return "UNRELATED";
    }
    return "UNRELATED";
}

}  // namespace fedqa
