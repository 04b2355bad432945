#include "fedqa/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "fedqa/answer.hpp"
#include "fedqa/consistency.hpp"
#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// 53-bit uniform in [0,1); avoids distribution classes whose output is
// implementation-defined, so draws are identical across platforms.
double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

std::string answer_text_as_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

OracleEntry entry_from_json(const nlohmann::json& j) {
    OracleEntry e;
    if (j.contains("skeleton")) {
        e.skeleton = j.at("skeleton").get<std::string>();
    } else if (j.contains("question")) {
        e.skeleton = canonicalize(j.at("question").get<std::string>()).skeleton;
    } else {
        throw ConfigError("oracle entry needs a skeleton or question field");
    }
    e.correct_answer = normalize_number(answer_text_as_string(j.at("correct_answer")));
    e.correct_prob = j.value("correct_prob", 1.0);
    e.correct_prob_with_cot = j.value("correct_prob_with_cot", -1.0);
    if (j.contains("wrong_answers")) {
        for (const auto& w : j.at("wrong_answers")) {
            e.wrong_answers.push_back(normalize_number(answer_text_as_string(w)));
        }
    }
    return e;
}

void validate_entry(const OracleEntry& e) {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(e.correct_prob)) {
        throw ConfigError("correct_prob out of [0,1] for skeleton: " + e.skeleton);
    }
    if (e.correct_prob_with_cot >= 0.0 && !prob_ok(e.correct_prob_with_cot)) {
        throw ConfigError("correct_prob_with_cot out of [0,1] for skeleton: " + e.skeleton);
    }
    for (const auto& w : e.wrong_answers) {
        if (w == e.correct_answer) {
            throw ConfigError("wrong_answers contains the correct answer for skeleton: " +
                              e.skeleton);
        }
    }
    if (e.wrong_answers.empty()) {
        throw ConfigError("wrong_answers pool must be nonempty for skeleton: " + e.skeleton);
    }
}

}  // namespace

OracleScript::OracleScript(std::vector<OracleEntry> entries)
    : entries_(std::move(entries)) {
    for (const auto& e : entries_) validate_entry(e);
}

void OracleScript::add(OracleEntry entry) {
    validate_entry(entry);
    entries_.push_back(std::move(entry));
}

OracleScript OracleScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open oracle script: " + path.string());
    OracleScript script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            script.add(entry_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("oracle script line " + std::to_string(line_no) + ": " +
                              e.what());
        }
    }
    return script;
}

const OracleEntry* OracleScript::find(const std::string& skeleton) const {
    const OracleEntry* best = nullptr;
    for (const auto& e : entries_) {
        if (e.skeleton == skeleton) return &e;
    }
    // A reworded question embeds the original text, so its skeleton contains
    // the scripted one. Longest match wins; ties go lexicographically.
    for (const auto& e : entries_) {
        if (skeleton.find(e.skeleton) == std::string::npos) continue;
        if (!best || e.skeleton.size() > best->skeleton.size() ||
            (e.skeleton.size() == best->skeleton.size() && e.skeleton < best->skeleton)) {
            best = &e;
        }
    }
    return best;
}

const std::vector<std::string>& oracle_rephrase_templates() {
    static const std::vector<std::string> templates = {
        "Could you determine the following: ",
        "Please work out this problem: ",
        "Here is a question to solve: ",
        "I would like to know: ",
        "Kindly figure out: ",
        "Consider and solve: ",
        "Help me answer this: ",
        "Solve the following exercise: ",
        "Take a moment to resolve: ",
    };
    return templates;
}

OracleBackend::OracleBackend(OracleScript script, std::uint64_t default_seed)
    : script_(std::move(script)), default_seed_(default_seed) {}

std::string OracleBackend::answer_one(const std::string& question_text,
                                      std::uint64_t seed, int sample_index,
                                      bool has_cot) {
    Question q = canonicalize(question_text);
    const OracleEntry* entry = script_.find(q.skeleton);
    if (!entry) throw ScriptMiss("oracle script has no entry for skeleton: " + q.skeleton);

    double p = has_cot && entry->correct_prob_with_cot >= 0.0
                   ? entry->correct_prob_with_cot
                   : entry->correct_prob;

    std::uint64_t base = splitmix64(splitmix64(seed) ^ fnv1a64(q.skeleton));
    std::uint64_t h = splitmix64(base + static_cast<std::uint64_t>(sample_index));
    bool correct = to_unit(h) < p;
    std::string answer = entry->correct_answer;
    if (!correct) {
        std::uint64_t pick = splitmix64(h ^ 0xD6E8FEB86659FD93ULL);
        answer = entry->wrong_answers[pick % entry->wrong_answers.size()];
    }

    std::string given;
    for (std::size_t i = 0; i < q.params.size(); ++i) {
        given += i == 0 ? " The given values are " : (i + 1 == q.params.size() ? " and " : ", ");
        given += q.params[i];
        if (i + 1 == q.params.size()) given += '.';
    }

    switch (splitmix64(h + 0x2545F4914F6CDD1DULL) % 4) {
        case 0:
            return "Step 1: restate the problem." + given +
                   " Step 2: combine the quantities. Step 3: check the arithmetic. "
                   "Therefore the answer is " + answer + ".";
        case 1:
            return "Let's work through it carefully." + given +
                   " Carrying out each step in order, the result is " + answer + ".";
        case 2:
            return "We reason step by step." + given +
                   " The computation settles on " + answer + ".";
        default:
            return "Breaking the problem into parts" + (given.empty() ? std::string(".") : "." + given) +
                   " Solving each part and adding things up, we conclude the answer is " +
                   answer + ".";
    }
}

std::vector<std::string> OracleBackend::complete(const CompletionRequest& req) {
    if (req.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    std::uint64_t seed = req.seed.value_or(default_seed_);

    // "Rephrase in k ways: <question>" -> numbered list of rewordings.
    constexpr std::string_view kRephrasePrefix = "Rephrase in ";
    if (req.prompt.rfind(kRephrasePrefix, 0) == 0) {
        std::size_t ways = req.prompt.find(" ways: ", kRephrasePrefix.size());
        if (ways != std::string::npos) {
            int k = 0;
            try {
                k = std::stoi(req.prompt.substr(kRephrasePrefix.size(),
                                                ways - kRephrasePrefix.size()));
            } catch (const std::exception&) {
                k = 0;
            }
            if (k >= 1) {
                std::string original = req.prompt.substr(ways + 7);
                const auto& templates = oracle_rephrase_templates();
                std::string list;
                for (int i = 0; i < k; ++i) {
                    std::string variant = templates[static_cast<std::size_t>(i) % templates.size()];
                    for (std::size_t rep = 0; rep < static_cast<std::size_t>(i) / templates.size(); ++rep) {
                        variant = "Once again: " + variant;
                    }
                    list += std::to_string(i + 1) + ". " + variant + original + "\n";
                }
                return std::vector<std::string>(static_cast<std::size_t>(req.n_samples), list);
            }
        }
    }

    // Otherwise: a question prompt, possibly with a CoT exemplar block. The
    // query is the last line before the zero-shot suffix.
    std::string body = req.prompt;
    if (body.size() >= kZeroShotSuffix.size() &&
        body.compare(body.size() - kZeroShotSuffix.size(), kZeroShotSuffix.size(),
                     kZeroShotSuffix) == 0) {
        body.resize(body.size() - kZeroShotSuffix.size());
    }
    bool has_cot = body.find("\nA: ") != std::string::npos || body.rfind("Q: ", 0) == 0;
    std::size_t nl = body.find_last_of('\n');
    std::string query = nl == std::string::npos ? body : body.substr(nl + 1);

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(req.n_samples));
    for (int i = 0; i < req.n_samples; ++i) {
        int index = req.temperature == 0.0 ? 0 : i;
        out.push_back(answer_one(query, seed, index, has_cot));
    }
    return out;
}

}  // namespace fedqa
