#include "fedqa/consistency.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a "1." / "2)" / "3:" / "-" / "*" list marker; returns false when the
// line is not a list item.
bool strip_list_marker(std::string& line) {
    if (line.empty()) return false;
    std::size_t i = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
    if (i > 0 && i < line.size() &&
        (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
        line = trim(std::string_view(line).substr(i + 1));
        return true;
    }
    if (line[0] == '-' || line[0] == '*') {
        line = trim(std::string_view(line).substr(1));
        return true;
    }
    return false;
}

}  // namespace

std::string rephrase_prompt(const Question& q, int k) {
    return "Rephrase in " + std::to_string(k) + " ways: " + q.text;
}

std::vector<Question> generate_rephrasings(const Question& q, int k,
                                           Backend& backend,
                                           const EngineConfig& cfg) {
    if (k < 1) throw std::invalid_argument("rephrasing count must be >= 1");

    CompletionRequest req;
    req.prompt = rephrase_prompt(q, k);
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.n_samples = 1;
    req.seed = cfg.seed;
    std::string listing = backend.complete(req).at(0);

    std::vector<Question> kept;
    int parsed = 0;
    std::size_t pos = 0;
    while (pos <= listing.size()) {
        std::size_t nl = listing.find('\n', pos);
        std::string line = trim(std::string_view(listing).substr(
            pos, nl == std::string::npos ? std::string::npos : nl - pos));
        pos = nl == std::string::npos ? listing.size() + 1 : nl + 1;
        if (line.empty() || !strip_list_marker(line) || line.empty()) continue;
        ++parsed;
        Question candidate = canonicalize(line);
        // A rewording that changes the numbers changes the problem; drop it.
        if (!same_params(candidate, q)) continue;
        kept.push_back(std::move(candidate));
        if (static_cast<int>(kept.size()) == k) break;
    }
    if (parsed == 0) {
        throw RephraseParseFailure("no list lines found in rephrasing output");
    }
    return kept;
}

AnswerSample answer_one_path(const Question& q, Backend& backend,
                             const EngineConfig& cfg) {
    CompletionRequest req;
    req.prompt = q.text + std::string(kZeroShotSuffix);
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.n_samples = 1;
    req.seed = cfg.seed;
    std::string completion = backend.complete(req).at(0);

    AnswerSample sample;
    sample.source_question = q;
    sample.completion = completion;
    sample.answer = try_extract_answer(completion);
    return sample;
}

VoteOutcome majority_vote(std::span<const AnswerSample> samples) {
    VoteOutcome outcome;
    outcome.n_paths = static_cast<int>(samples.size());
    for (const auto& sample : samples) {
        if (!sample.answer) continue;
        auto it = std::find_if(outcome.tallies.begin(), outcome.tallies.end(),
                               [&](const auto& t) {
                                   return answers_equal(t.first, *sample.answer);
                               });
        if (it == outcome.tallies.end()) {
            outcome.tallies.emplace_back(*sample.answer, 1);
        } else {
            ++it->second;
        }
    }
    if (outcome.tallies.empty()) {
        throw AllPathsFailed("no sample produced an extractable answer");
    }
    // Tallies sit in first-seen order, so a strict > keeps ties on the
    // answer produced by the lowest-index sample.
    const auto* best = &outcome.tallies.front();
    for (const auto& t : outcome.tallies) {
        if (t.second > best->second) best = &t;
    }
    outcome.winner = best->first;
    outcome.confidence =
        static_cast<double>(best->second) / static_cast<double>(outcome.n_paths);
    return outcome;
}

SpScResult fed_sp_sc(const Question& q, std::span<const Question> sp_peers,
                     int paths, Backend& backend, const EngineConfig& cfg) {
    if (paths < 1) throw std::invalid_argument("paths must be >= 1");

    std::vector<Question> path_set;
    path_set.reserve(static_cast<std::size_t>(paths));
    path_set.push_back(q);
    for (const auto& peer : sp_peers) {
        if (static_cast<int>(path_set.size()) >= paths) break;
        path_set.push_back(peer);
    }
    if (static_cast<int>(path_set.size()) < paths) {
        int missing = paths - static_cast<int>(path_set.size());
        try {
            auto rephrased = generate_rephrasings(q, missing, backend, cfg);
            for (auto& r : rephrased) {
                if (static_cast<int>(path_set.size()) >= paths) break;
                path_set.push_back(std::move(r));
            }
        } catch (const RephraseParseFailure&) {
            // fall through to repeated sampling
        }
    }
    // Still short: repeat existing paths (extra samples of the same question).
    for (std::size_t i = 0; static_cast<int>(path_set.size()) < paths; ++i) {
        path_set.push_back(path_set[i % path_set.size()]);
    }

    // One request per distinct question, n_samples = occurrence count.
    std::vector<std::string> order;
    std::map<std::string, int> counts;
    for (const auto& question : path_set) {
        if (counts.emplace(question.text, 0).second) order.push_back(question.text);
        ++counts[question.text];
    }

    std::unordered_map<std::string, std::future<std::vector<std::string>>> futures;
    for (const auto& text : order) {
        CompletionRequest req;
        req.prompt = text + std::string(kZeroShotSuffix);
        req.temperature = cfg.temperature;
        req.max_tokens = cfg.max_tokens;
        req.n_samples = counts[text];
        req.seed = cfg.seed;
        futures.emplace(text, std::async(std::launch::async,
                                         [&backend, req] { return backend.complete(req); }));
    }
    std::unordered_map<std::string, std::vector<std::string>> completions;
    for (const auto& text : order) completions.emplace(text, futures.at(text).get());

    SpScResult result;
    result.samples.reserve(path_set.size());
    std::unordered_map<std::string, std::size_t> used;
    for (const auto& question : path_set) {
        std::size_t slot = used[question.text]++;
        const std::string& completion = completions.at(question.text).at(slot);
        AnswerSample sample;
        sample.source_question = question;
        sample.completion = completion;
        sample.answer = try_extract_answer(completion);
        result.samples.push_back(std::move(sample));
    }
    result.vote = majority_vote(result.samples);
    return result;
}

}  // namespace fedqa
