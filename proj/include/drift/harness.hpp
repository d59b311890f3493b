#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drift/alias.hpp"
#include "drift/icl.hpp"
#include "drift/io.hpp"
#include "drift/llm.hpp"
#include "drift/text.hpp"

namespace drift {

struct QuestionItem {
    std::string id;
    std::string question;
};

// Reads {"id","question",...} records; extra keys are ignored.
inline std::vector<QuestionItem> read_questions(const fs::path& path) {
    std::vector<QuestionItem> out;
    for (const auto& j : read_jsonl(path)) {
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("question") || !j["question"].is_string())
            throw Error(path.string() + ": question record needs string 'id' and 'question'");
        out.push_back({j["id"].get<std::string>(), j["question"].get<std::string>()});
    }
    return out;
}

struct ScoredPath {
    NormalizedPath path;
    double score;
};

struct LexicalOptions {
    std::size_t top_k = 3;
    double min_score = 0.15;
};

// Path-token overlap fraction plus half the mean saturated content frequency
// tf/(tf+1) over the distinct content tokens of the question.
inline std::vector<ScoredPath> lexical_rank(const std::string& question, const SnapshotIndex& snapshot,
                                            const std::map<std::string, std::string>* contents = nullptr,
                                            const LexicalOptions& opts = {}) {
    std::vector<ScoredPath> out;
    auto q_vec = content_tokens(question);
    std::set<std::string> q(q_vec.begin(), q_vec.end());
    if (q.empty() || opts.top_k == 0)
        return out;
    const double qn = static_cast<double>(q.size());
    for (const auto& p : snapshot.paths()) {
        auto pt = tokenize(p.str());
        std::set<std::string> path_tokens(pt.begin(), pt.end());
        std::size_t overlap = 0;
        for (const auto& t : q)
            overlap += path_tokens.count(t);
        double score = static_cast<double>(overlap) / qn;
        if (contents) {
            auto it = contents->find(p.str());
            if (it != contents->end()) {
                auto tf = term_counts(tokenize(it->second));
                double sat = 0.0;
                for (const auto& t : q) {
                    auto f = tf.find(t);
                    if (f != tf.end())
                        sat += static_cast<double>(f->second) / (static_cast<double>(f->second) + 1.0);
                }
                score += 0.5 * sat / qn;
            }
        }
        if (score >= opts.min_score)
            out.push_back({p, score});
    }
    std::stable_sort(out.begin(), out.end(), [](const ScoredPath& a, const ScoredPath& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.path < b.path;
    });
    if (out.size() > opts.top_k)
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(opts.top_k), out.end());
    return out;
}

inline std::string to_json_array(const std::vector<ScoredPath>& ranked) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : ranked)
        a.push_back(r.path.str());
    return a.dump();
}

// Produces raw model output for a question; the text is what parse_prediction consumes.
class Adapter {
public:
    virtual ~Adapter() = default;
    virtual std::string answer(const QuestionItem& q, const ICLPrompt* prompt) = 0;
};

class ReplayAdapter final : public Adapter {
public:
    explicit ReplayAdapter(std::map<std::string, std::string> outputs) : outputs_(std::move(outputs)) {}

    std::string answer(const QuestionItem& q, const ICLPrompt*) override {
        auto it = outputs_.find(q.id);
        return it == outputs_.end() ? "[]" : it->second;
    }

private:
    std::map<std::string, std::string> outputs_;
};

inline std::string bare_question_system_prompt() {
    return "Your task: given a user question, return repository-root-relative file path(s) that are most relevant.\n\n" +
           std::string(kStrictOutputRules);
}

class ServiceAdapter final : public Adapter {
public:
    explicit ServiceAdapter(ChatBackend& backend) : backend_(backend) {}

    std::string answer(const QuestionItem& q, const ICLPrompt* prompt) override {
        ChatRequest req;
        req.temperature = 0.0;
        if (prompt) {
            req.messages = {{"system", prompt->system_text}, {"user", prompt->user_text}};
        } else {
            req.messages = {{"system", bare_question_system_prompt()}, {"user", question_line(q.question, false)}};
        }
        return backend_.complete(req);
    }

private:
    ChatBackend& backend_;
};

class LexicalAdapter final : public Adapter {
public:
    LexicalAdapter(SnapshotIndex snapshot, std::optional<std::map<std::string, std::string>> contents, LexicalOptions opts)
        : snapshot_(std::move(snapshot)), contents_(std::move(contents)), opts_(opts) {}

    std::string answer(const QuestionItem& q, const ICLPrompt*) override {
        return to_json_array(lexical_rank(q.question, snapshot_, contents_ ? &*contents_ : nullptr, opts_));
    }

private:
    SnapshotIndex snapshot_;
    std::optional<std::map<std::string, std::string>> contents_;
    LexicalOptions opts_;
};

inline ordered_json to_prediction_record(const std::string& id, const std::string& raw_output) {
    return {{"id", id}, {"raw_output", raw_output}};
}

} // namespace drift
