#include "ctig/verify.hpp"

#include <algorithm>
#include <cctype>

#include "ctig/prompts.hpp"
#include "ctig/text_util.hpp"

namespace ctig {

std::string_view quality_level_name(QualityLevel l) {
    switch (l) {
        case QualityLevel::excellent: return "excellent";
        case QualityLevel::good: return "good";
        case QualityLevel::satisfactory: return "satisfactory";
        case QualityLevel::failing: return "failing";
    }
    return "failing";
}

std::optional<QualityLevel> quality_level_from_name(std::string_view s) {
    if (s == "excellent") return QualityLevel::excellent;
    if (s == "good") return QualityLevel::good;
    if (s == "satisfactory") return QualityLevel::satisfactory;
    if (s == "failing") return QualityLevel::failing;
    return std::nullopt;
}

std::string_view paradigm_name(Paradigm p) {
    return p == Paradigm::q_led ? "q_led" : "a_iteration";
}

std::optional<Paradigm> paradigm_from_name(std::string_view s) {
    if (s == "q_led") return Paradigm::q_led;
    if (s == "a_iteration") return Paradigm::a_iteration;
    return std::nullopt;
}

bool lexical_failing_check(std::string_view text, const std::vector<std::string>& phrases) {
    for (const std::string& phrase : phrases) {
        if (contains_ci(text, phrase)) return true;
    }
    return false;
}

namespace {

ChatRequest image_request(const Gateway& gateway, std::string prompt, const ThreatImage& image) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{std::move(prompt)});
    msg.parts.push_back(image.as_part());
    req.messages.push_back(std::move(msg));
    return req;
}

// Earliest level word in the reply wins.
std::optional<QualityLevel> parse_level(std::string_view reply) {
    std::string folded = fold_case(reply);
    std::optional<QualityLevel> best;
    std::size_t best_pos = std::string::npos;
    for (QualityLevel l : {QualityLevel::excellent, QualityLevel::good,
                           QualityLevel::satisfactory, QualityLevel::failing}) {
        std::size_t pos = folded.find(quality_level_name(l));
        if (pos != std::string::npos && pos < best_pos) {
            best = l;
            best_pos = pos;
        }
    }
    return best;
}

bool parse_yes(std::string_view reply) {
    std::string folded = normalize_lookup(reply);
    return folded == "yes" || folded.rfind("yes ", 0) == 0 || folded.rfind("yes,", 0) == 0;
}

std::optional<std::map<std::string, int>> parse_dimension_scores(std::string_view reply) {
    static const char* dimensions[] = {"accuracy", "consistency", "completeness", "relevance"};
    std::map<std::string, int> scores;
    std::string folded = fold_case(reply);
    for (const char* dim : dimensions) {
        std::size_t pos = folded.find(dim);
        if (pos == std::string::npos) return std::nullopt;
        pos += std::string_view(dim).size();
        while (pos < folded.size() &&
               !std::isdigit(static_cast<unsigned char>(folded[pos]))) {
            ++pos;
        }
        if (pos >= folded.size()) return std::nullopt;
        int score = folded[pos] - '0';
        if (score < 1 || score > 5) return std::nullopt;
        scores[dim] = score;
    }
    return scores;
}

}  // namespace

QualityAssessment assess_answer(const Answer& answer, const Question& question,
                                const ThreatImage& image, Gateway& gateway,
                                const VerifyOptions& options, std::vector<std::string>* warnings) {
    if (lexical_failing_check(answer.text, options.failing_phrases)) {
        QualityAssessment assessment;
        assessment.level = QualityLevel::failing;
        assessment.comment = "The answer hedges instead of naming image content.";
        return assessment;
    }

    QualityAssessment assessment;
    std::optional<QualityLevel> level;
    // Evaluation calls carry no conversation history.
    for (int attempt = 0; attempt < 2 && !level; ++attempt) {
        std::string reply = gateway.complete(image_request(
            gateway, prompts::evaluate_answer(question.text, answer.text), image));
        level = parse_level(reply);
        if (!level && warnings != nullptr) {
            warnings->push_back("unparseable quality level \"" + trim(reply).substr(0, 60) +
                                "\" for " + answer.question_id);
        }
    }
    if (level) {
        assessment.level = *level;
    } else {
        assessment.level = QualityLevel::satisfactory;
        if (warnings != nullptr) {
            warnings->push_back("defaulting " + answer.question_id +
                                " to satisfactory after two unparseable evaluations");
        }
    }

    if (options.assess_dimensions) {
        std::string reply = gateway.complete(image_request(
            gateway, prompts::score_dimensions(question.text, answer.text), image));
        assessment.dimension_scores = parse_dimension_scores(reply);
        if (!assessment.dimension_scores && warnings != nullptr) {
            warnings->push_back("unparseable dimension scores for " + answer.question_id);
        }
    }
    return assessment;
}

std::optional<FilterLabel> filter_question_direct(const Question& question,
                                                  const std::string& graph_summary,
                                                  Gateway& gateway,
                                                  std::vector<std::string>* warnings) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::filter_direct(question.text, graph_summary)});
    req.messages.push_back(std::move(msg));
    try {
        if (parse_yes(gateway.complete(req))) return FilterLabel::direct_correlation;
        return std::nullopt;  // deferred to the answer-oriented stage
    } catch (const GatewayError& e) {
        if (warnings != nullptr) {
            warnings->push_back("direct filter failed for " + question.id + ": " + e.what());
        }
        return std::nullopt;
    }
}

FilterLabel filter_question_answer_oriented(const Question& question, const Answer& answer,
                                            Gateway& gateway,
                                            std::vector<std::string>* warnings) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::filter_answer_oriented(question.text, answer.text)});
    req.messages.push_back(std::move(msg));
    try {
        return parse_yes(gateway.complete(req)) ? FilterLabel::answer_oriented
                                                : FilterLabel::non_related;
    } catch (const GatewayError& e) {
        if (warnings != nullptr) {
            warnings->push_back("answer-oriented filter failed for " + question.id +
                                ", excluding conservatively: " + e.what());
        }
        return FilterLabel::non_related;
    }
}

Answer refine_answer(Answer answer, const Question& question, const ThreatImage& image,
                     const ContextPair& contexts, const RefinementConfig& config,
                     Gateway& gateway, const VerifyOptions& verify_options,
                     const ExtractOptions& extract_options, std::vector<std::string>* warnings) {
    if (!answer.quality) {
        throw VerifyError("refine_answer: answer " + answer.question_id +
                          " has not been assessed");
    }
    if (config.accept_levels.count(answer.quality->level) != 0) {
        throw VerifyError("refine_answer: answer " + answer.question_id +
                          " is already accepted");
    }
    if (answer.history.empty()) {
        answer.history.push_back({answer.round, answer.text, answer.quality, std::nullopt});
    } else {
        answer.history.back().quality = answer.quality;
    }

    while (config.accept_levels.count(answer.quality->level) == 0 &&
           answer.round < config.max_rounds) {
        try {
            std::string image_ctx =
                extract_options.include_image_context ? contexts.image_aware : std::string();
            std::string global_ctx =
                extract_options.include_global_context ? contexts.global : std::string();

            std::string guide;
            std::string prompt;
            if (config.paradigm == Paradigm::a_iteration) {
                guide = trim(gateway.complete(image_request(
                    gateway, prompts::optimization_comment(question.text, answer.text), image)));
                answer.quality->comment = guide;
                answer.history.back().quality = answer.quality;
                prompt = prompts::refine_with_comment(question.text, answer.text, guide,
                                                      image_ctx, global_ctx);
            } else {
                guide = trim(gateway.complete(image_request(
                    gateway, prompts::refinement_suggestion(question.text, answer.text), image)));
                answer.quality->suggestion = guide;
                answer.history.back().quality = answer.quality;
                prompt = prompts::refine_with_suggestion(question.text, guide, image_ctx,
                                                         global_ctx);
            }

            ChatRequest req = image_request(gateway, prompt, image);
            req.max_tokens = extract_options.max_tokens;
            std::string response = trim(gateway.complete(req));
            auto [normalized, violations] =
                enforce_answer_constraints(response, extract_options.answer_char_budget);
            if (warnings != nullptr) {
                for (const AnswerViolation& v : violations) {
                    warnings->push_back("refined answer " + answer.question_id + ": " + v.rule);
                }
            }

            answer.round += 1;
            answer.text = normalized;
            AnswerRound round_entry;
            round_entry.round = answer.round;
            round_entry.text = normalized;
            if (config.paradigm == Paradigm::q_led) round_entry.suggestion = guide;
            answer.history.push_back(std::move(round_entry));

            answer.quality =
                assess_answer(answer, question, image, gateway, verify_options, warnings);
            answer.history.back().quality = answer.quality;
        } catch (const GatewayError& e) {
            answer.aborted = true;
            if (warnings != nullptr) {
                warnings->push_back("refinement aborted for " + answer.question_id + ": " +
                                    e.what());
            }
            break;
        }
    }
    return answer;
}

std::vector<QualityDistributionRow> quality_distribution(const std::vector<Answer>& answers) {
    std::map<int, QualityDistributionRow> rows;
    for (const Answer& answer : answers) {
        for (const AnswerRound& round : answer.history) {
            if (!round.quality) continue;
            QualityDistributionRow& row = rows[round.round];
            row.round = round.round;
            row.counts[round.quality->level] += 1;
            row.total += 1;
        }
    }
    std::vector<QualityDistributionRow> out;
    for (auto& [round, row] : rows) {
        int positive = 0;
        auto well = row.counts.find(QualityLevel::excellent);
        if (well != row.counts.end()) positive += well->second;
        auto good = row.counts.find(QualityLevel::good);
        if (good != row.counts.end()) positive += good->second;
        row.positive_fraction =
            row.total > 0 ? static_cast<double>(positive) / static_cast<double>(row.total) : 0.0;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace ctig
