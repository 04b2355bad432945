// Shared fixtures and independent reference implementations for the tests.
// Reference code here must stay independent of the library paths it checks.
#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedqa/backend.hpp"
#include "fedqa/eval.hpp"
#include "fedqa/oracle.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Question pairs used across the suites: two synonymous same-parameter pairs
// (farm, letters) and one same-meaning different-parameter pair (farm-dp).

inline const std::string kFarmQ1 =
    "If a farmer has a certain number of chickens and rabbits in a barn, and there "
    "are a total of 32 heads and 100 feet, how many chickens and how many rabbits "
    "does the farmer have?";
inline const std::string kFarmQ2 =
    "In a barn, there are a certain number of chickens and rabbits that have a total "
    "of 32 heads and 100 feet.  how many of each animal are in the barn?";
inline const std::string kJamesQ1 =
    "James writes a 3-page letter to 2 different friends twice a week.How many pages "
    "does he write a year?";
inline const std::string kJamesQ2 =
    "If James writes a 3-page letter to two different friends twice per week,what is "
    "the total number of pages he produces every year?";
inline const std::string kFarmDpQ2 =
    "A farmer has a total of 20 chickens and rabbits in his barn. If the total number "
    "of legs in the barn is 56, how many chickens and how many rabbits are in the "
    "barn?";

inline const std::string kFarmCompletion =
    "Let x= the number of chickens and y= the number of rabbits. We can set up the "
    "following system of equations:x + y = 32  (heads), 2x + 4y = 100 (feet), Solving "
    "this system of equations, we get x = 20 and y = 12.Therefore, there are 20 "
    "chickens and 12 rabbits in the barn.";
inline const std::string kJamesCompletion =
    "James writes two 3-page letters twice per week. There are 52 weeks in a year. "
    "Therefore, James produces a total of 312 pages every year(2 * 3 * 52=312).";

// ---------------------------------------------------------------------------
// Independent reference implementations.

// Word-trigram Jaccard, built on std::set<std::vector> rather than the
// library's hashed-string sets.
inline double trigram_jaccard_reference(const std::string& a, const std::string& b) {
    auto words = [](const std::string& s) {
        std::vector<std::string> w;
        std::string cur;
        for (char c : s) {
            if (c == ' ') {
                if (!cur.empty()) w.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) w.push_back(cur);
        return w;
    };
    auto grams = [&](const std::string& s) {
        std::set<std::vector<std::string>> g;
        auto w = words(s);
        for (std::size_t i = 0; i + 2 < w.size(); ++i) g.insert({w[i], w[i + 1], w[i + 2]});
        return g;
    };
    if (a == b) return 1.0;
    auto ga = grams(a);
    auto gb = grams(b);
    std::size_t inter = 0;
    for (const auto& g : ga) {
        if (gb.count(g)) ++inter;
    }
    std::size_t uni = ga.size() + gb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Counting vote: first-seen tally order, argmax by count, ties to the answer
// whose first vote has the lowest sample index.
inline std::string vote_reference(const std::vector<std::string>& answers) {
    std::vector<std::pair<std::string, int>> tally;
    for (const auto& a : answers) {
        bool found = false;
        for (auto& t : tally) {
            if (t.first == a) {
                ++t.second;
                found = true;
            }
        }
        if (!found) tally.push_back({a, 1});
    }
    std::string best;
    int best_count = -1;
    for (const auto& t : tally) {
        if (t.second > best_count) {
            best = t.first;
            best_count = t.second;
        }
    }
    return best;
}

// P(majority of n iid paths lands on the correct answer) with one fixed wrong
// answer, by enumerating all 2^n outcome patterns.
inline double majority_accuracy_reference(int n, double p) {
    double acc = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        int correct = __builtin_popcount(static_cast<unsigned>(mask));
        double pr = 1.0;
        for (int b = 0; b < n; ++b) pr *= ((mask >> b) & 1) ? p : (1.0 - p);
        int wrong = n - correct;
        bool correct_wins =
            correct > wrong || (correct == wrong && (mask & 1));  // tie: lowest index
        if (correct_wins) acc += pr;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Synthetic dataset + oracle script for seeded simulation runs. Each question
// carries a unique nonsense word so every skeleton is distinct and draws are
// independent across questions.

inline std::string base26_word(std::size_t i) {
    std::string w;
    do {
        w.push_back(static_cast<char>('a' + i % 26));
        i /= 26;
    } while (i > 0);
    return "zq" + w;  // avoid colliding with real words
}

struct SyntheticCase {
    std::string text;
    long long gold;
};

inline SyntheticCase synthetic_case(std::size_t i) {
    long long a = 10 + static_cast<long long>(i % 83);
    long long b = 3 + static_cast<long long>(i % 7);
    SyntheticCase c;
    c.text = "Workshop " + base26_word(i) + " packs " + std::to_string(a) +
             " boxes and " + std::to_string(b) +
             " crates every morning. How many containers does it pack in total?";
    c.gold = a + b;
    return c;
}

inline std::vector<fedqa::DatasetItem> synthetic_dataset(std::size_t n) {
    std::vector<fedqa::DatasetItem> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticCase c = synthetic_case(i);
        fedqa::DatasetItem item;
        item.id = "q" + std::to_string(i + 1);
        item.text = c.text;
        item.gold.value = std::to_string(c.gold);
        item.gold.raw_span = item.gold.value;
        items.push_back(std::move(item));
    }
    return items;
}

inline fedqa::OracleScript synthetic_script(std::size_t n, double correct_prob,
                                            double correct_prob_with_cot = -1.0) {
    fedqa::OracleScript script;
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticCase c = synthetic_case(i);
        fedqa::OracleEntry e;
        e.skeleton = fedqa::canonicalize(c.text).skeleton;
        e.correct_answer = std::to_string(c.gold);
        e.correct_prob = correct_prob;
        e.correct_prob_with_cot = correct_prob_with_cot;
        e.wrong_answers = {std::to_string(c.gold + 1)};
        script.add(e);
    }
    return script;
}

inline void write_synthetic_gsm8k(const std::filesystem::path& path, std::size_t n) {
    std::ofstream out(path, std::ios::trunc);
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticCase c = synthetic_case(i);
        out << "{\"question\": \"" << c.text
            << "\", \"answer\": \"Count the boxes, then the crates.\\n#### " << c.gold
            << "\"}\n";
    }
}

inline void write_synthetic_script(const std::filesystem::path& path, std::size_t n,
                                   double correct_prob,
                                   double correct_prob_with_cot = -1.0) {
    std::ofstream out(path, std::ios::trunc);
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticCase c = synthetic_case(i);
        out << "{\"question\": \"" << c.text << "\", \"correct_answer\": \"" << c.gold
            << "\", \"correct_prob\": " << correct_prob << ", \"wrong_answers\": [\""
            << c.gold + 1 << "\"]";
        if (correct_prob_with_cot >= 0.0) {
            out << ", \"correct_prob_with_cot\": " << correct_prob_with_cot;
        }
        out << "}\n";
    }
}

// ---------------------------------------------------------------------------
// Test doubles and scratch space.

// Wraps any backend and counts calls/samples; used to assert zero-backend-call
// guarantees.
class CountingBackend : public fedqa::Backend {
public:
    explicit CountingBackend(fedqa::Backend& inner) : inner_(inner) {}

    std::vector<std::string> complete(const fedqa::CompletionRequest& req) override {
        ++calls_;
        samples_ += req.n_samples;
        return inner_.complete(req);
    }
    std::string kind() const override { return inner_.kind(); }

    int calls() const { return calls_.load(); }
    int samples() const { return samples_.load(); }
    void reset() {
        calls_ = 0;
        samples_ = 0;
    }

private:
    fedqa::Backend& inner_;
    std::atomic<int> calls_{0};
    std::atomic<int> samples_{0};
};

// Returns fixed texts in order, cycling; optionally fails the first N calls.
class ScriptedBackend : public fedqa::Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::vector<std::string> complete(const fedqa::CompletionRequest& req) override {
        std::vector<std::string> out;
        for (int i = 0; i < req.n_samples; ++i) {
            out.push_back(responses_[next_++ % responses_.size()]);
        }
        return out;
    }
    std::string kind() const override { return "scripted"; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> seq{0};
        path = std::filesystem::temp_directory_path() /
               ("fedqa-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(++seq));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace testsupport
