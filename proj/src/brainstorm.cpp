#include "ctig/brainstorm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "ctig/prompts.hpp"
#include "ctig/text_util.hpp"
#include "json.hpp"

namespace ctig {

std::string_view question_kind_name(QuestionKind k) {
    return k == QuestionKind::general ? "general" : "task_specific";
}

std::optional<QuestionKind> question_kind_from_name(std::string_view s) {
    if (s == "general") return QuestionKind::general;
    if (s == "task_specific") return QuestionKind::task_specific;
    return std::nullopt;
}

std::string_view filter_label_name(FilterLabel l) {
    switch (l) {
        case FilterLabel::direct_correlation: return "direct_correlation";
        case FilterLabel::answer_oriented: return "answer_oriented";
        case FilterLabel::non_related: return "non_related";
    }
    return "non_related";
}

std::optional<FilterLabel> filter_label_from_name(std::string_view s) {
    if (s == "direct_correlation") return FilterLabel::direct_correlation;
    if (s == "answer_oriented") return FilterLabel::answer_oriented;
    if (s == "non_related") return FilterLabel::non_related;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

LeadingQuestionBank LeadingQuestionBank::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw BrainstormError("cannot open leading-question bank: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw BrainstormError("invalid bank JSON: " + std::string(e.what()));
    }
    std::map<ImageType, std::vector<std::string>> seeds;
    for (const auto& [key, value] : doc.items()) {
        auto type = image_type_from_name(key);
        if (!type) throw BrainstormError("unknown image type in bank: \"" + key + "\"");
        if (!value.is_array()) throw BrainstormError("bank entry for " + key + " must be an array");
        for (const auto& q : value) seeds[*type].push_back(q.get<std::string>());
    }
    return from_map(std::move(seeds));
}

LeadingQuestionBank LeadingQuestionBank::from_map(
    std::map<ImageType, std::vector<std::string>> seeds) {
    for (ImageType t : kAllImageTypes) {
        auto it = seeds.find(t);
        if (it == seeds.end() || it->second.empty()) {
            throw BrainstormError("leading-question bank is missing image type \"" +
                                  std::string(image_type_name(t)) + "\"");
        }
    }
    LeadingQuestionBank bank;
    bank.seeds_ = std::move(seeds);
    return bank;
}

const std::vector<std::string>& LeadingQuestionBank::for_type(ImageType t) const {
    return seeds_.at(t);
}

// ---------------------------------------------------------------------------

namespace {

// One question per line; drops numbering, bullets, and non-interrogatives.
std::vector<std::string> parse_question_lines(std::string_view response) {
    std::vector<std::string> questions;
    for (const std::string& raw : split_lines(response)) {
        std::string line = trim(raw);
        while (!line.empty() && (line[0] == '-' || line[0] == '*' || std::isdigit(static_cast<unsigned char>(line[0])) ||
                                 line[0] == '.' || line[0] == ')' || line[0] == ':')) {
            line.erase(0, 1);
            line = trim(line);
        }
        if (line.empty() || line.back() != '?') continue;
        questions.push_back(line);
    }
    return questions;
}

std::vector<Question> generate_questions(const ThreatImage& image, const std::string& prompt,
                                         QuestionKind kind,
                                         const std::vector<std::string>& dedup_against,
                                         Gateway& gateway, std::vector<std::string>* warnings) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompt});
    msg.parts.push_back(image.as_part());
    req.messages.push_back(std::move(msg));

    std::string response = gateway.complete(req);
    std::vector<std::string> lines = parse_question_lines(response);

    std::set<std::string> seen;
    for (const std::string& seed : dedup_against) seen.insert(normalize_question(seed));

    std::vector<Question> out;
    for (std::string& text : lines) {
        std::string key = normalize_question(text);
        if (key.empty() || !seen.insert(key).second) continue;
        Question q;
        q.image_id = image.id;
        q.text = std::move(text);
        q.kind = kind;
        out.push_back(std::move(q));
    }
    if (out.empty() && warnings != nullptr) {
        warnings->push_back("no parseable questions generated for image " + image.id);
    }
    return out;
}

}  // namespace

std::vector<Question> generate_general_questions(const ThreatImage& image,
                                                 const LeadingQuestionBank& bank,
                                                 const ContextPair& contexts, Gateway& gateway,
                                                 std::vector<std::string>* warnings) {
    if (!image.image_type) {
        throw BrainstormError("image " + image.id + " has not been classified");
    }
    const std::vector<std::string>& seeds = bank.for_type(*image.image_type);
    return generate_questions(image, prompts::generate_general_questions(seeds, contexts),
                              QuestionKind::general, seeds, gateway, warnings);
}

std::vector<Question> generate_task_questions(const ThreatImage& image,
                                              const std::string& graph_summary,
                                              const ContextPair& contexts, Gateway& gateway,
                                              std::vector<std::string>* warnings) {
    if (trim(graph_summary).empty()) {
        throw BrainstormError("task-specific generation needs a non-empty graph summary");
    }
    return generate_questions(image, prompts::generate_task_questions(graph_summary, contexts),
                              QuestionKind::task_specific, {}, gateway, warnings);
}

QuestionPool build_pool(const std::vector<Question>& general,
                        const std::vector<Question>& task_specific, std::size_t cap) {
    QuestionPool pool;
    std::set<std::string> seen;
    auto absorb = [&](const std::vector<Question>& source) {
        for (const Question& q : source) {
            if (pool.image_id.empty()) pool.image_id = q.image_id;
            if (q.image_id != pool.image_id) {
                throw BrainstormError("build_pool: mixed image ids (" + pool.image_id + " vs " +
                                      q.image_id + ")");
            }
            if (pool.questions.size() >= cap) return;
            std::string key = normalize_question(q.text);
            if (!seen.insert(key).second) continue;
            pool.questions.push_back(q);
        }
    };
    absorb(general);
    absorb(task_specific);

    for (std::size_t i = 0; i < pool.questions.size(); ++i) {
        char buffer[8];
        std::snprintf(buffer, sizeof(buffer), "%03zu", i + 1);
        pool.questions[i].id = "q-" + pool.image_id + "-" + buffer;
    }
    return pool;
}

double mean_pairwise_similarity(const std::vector<std::string>& texts) {
    if (texts.size() < 2) {
        throw BrainstormError("undefined-metric: similarity needs at least two questions");
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        for (std::size_t j = i + 1; j < texts.size(); ++j) {
            sum += token_jaccard(normalize_question(texts[i]), normalize_question(texts[j]));
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

double pool_monotonicity(const QuestionPool& pool) {
    std::vector<std::string> texts;
    texts.reserve(pool.questions.size());
    for (const Question& q : pool.questions) texts.push_back(q.text);
    return mean_pairwise_similarity(texts);
}

}  // namespace ctig
