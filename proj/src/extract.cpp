#include "ctig/extract.hpp"

#include <algorithm>
#include <cctype>

#include "ctig/prompts.hpp"
#include "ctig/text_util.hpp"

namespace ctig {

namespace {

bool is_sentence_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

// First sentence boundary: terminator outside quotes, followed by
// whitespace or end of text. Keeps dots inside names like explorer.exe.
std::size_t first_sentence_end(std::string_view text) {
    bool in_double = false;
    bool in_single = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '"') in_double = !in_double;
        if (c == '\'') in_single = !in_single;
        if (!in_double && !in_single && is_sentence_terminator(c)) {
            bool at_end = i + 1 == text.size();
            bool before_space = !at_end && std::isspace(static_cast<unsigned char>(text[i + 1]));
            if (at_end || before_space) return i + 1;
        }
    }
    return text.size();
}

// Advisory topic-phrase heuristic: a sentence that opens with a verb or a
// bare yes/no has no topic phrase in front.
bool looks_topicless(std::string_view sentence) {
    static const char* leading_verbs[] = {
        "is", "are", "was", "were", "be",      "yes",     "no",       "shows",
        "show", "depicts", "contains", "includes", "uses", "represents", "indicates",
        "reflects", "describes",
    };
    std::string folded = normalize_lookup(sentence);
    std::size_t sp = folded.find(' ');
    std::string first = sp == std::string::npos ? folded : folded.substr(0, sp);
    for (const char* v : leading_verbs) {
        if (first == v) return true;
    }
    return false;
}

}  // namespace

std::pair<std::string, std::vector<AnswerViolation>> enforce_answer_constraints(
    std::string_view text, std::size_t char_budget) {
    std::vector<AnswerViolation> violations;
    std::string body = trim(text);

    std::size_t cut = first_sentence_end(body);
    if (cut < body.size()) {
        std::string rest = trim(body.substr(cut));
        if (!rest.empty()) {
            violations.push_back({"multi-sentence", "trimmed trailing text: \"" +
                                                        rest.substr(0, 60) + "\""});
        }
        body.resize(cut);
        body = trim(body);
    }

    if (body.size() > char_budget) {
        body.resize(char_budget > 0 ? char_budget - 1 : 0);
        violations.push_back({"truncated", "answer exceeded the character budget of " +
                                               std::to_string(char_budget)});
    }

    // Exactly one terminator at the end.
    while (!body.empty() && is_sentence_terminator(body.back())) body.pop_back();
    body = trim(body);
    body.push_back('.');

    if (looks_topicless(body)) {
        violations.push_back({"missing-topic-phrase", "sentence opens without a topic phrase"});
    }
    return {std::move(body), std::move(violations)};
}

Answer answer_question(const Question& question, const ThreatImage& image,
                       const ContextPair& contexts, Gateway& gateway,
                       const ExtractOptions& options, std::vector<std::string>* warnings) {
    ChatRequest req = gateway.new_request();
    req.max_tokens = options.max_tokens;
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::answer_question(
        question.text, options.include_image_context ? contexts.image_aware : std::string(),
        options.include_global_context ? contexts.global : std::string())});
    msg.parts.push_back(image.as_part());
    req.messages.push_back(std::move(msg));

    std::string response = trim(gateway.complete(req));
    if (response.empty()) {
        throw ExtractError("empty-response: the model returned nothing for question " +
                           question.id);
    }

    auto [normalized, violations] = enforce_answer_constraints(response, options.answer_char_budget);
    if (warnings != nullptr) {
        for (const AnswerViolation& v : violations) {
            warnings->push_back("answer " + question.id + ": " + v.rule + " (" + v.detail + ")");
        }
    }

    Answer answer;
    answer.question_id = question.id;
    answer.text = normalized;
    answer.round = 1;
    answer.history.push_back({1, normalized, std::nullopt, std::nullopt});
    return answer;
}

}  // namespace ctig
