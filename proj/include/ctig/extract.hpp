#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctig/brainstorm.hpp"
#include "ctig/corpus.hpp"
#include "ctig/gateway.hpp"
#include "ctig/quality.hpp"

namespace ctig {

struct ExtractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnswerRound {
    int round = 1;
    std::string text;
    std::optional<QualityAssessment> quality;
    std::optional<std::string> suggestion;  // guide that produced this round
};

struct Answer {
    std::string question_id;
    std::string text;
    int round = 1;
    std::optional<QualityAssessment> quality;
    std::vector<AnswerRound> history;  // history.size() == round
    bool aborted = false;              // refinement loop hit a gateway failure
};

struct AnswerViolation {
    std::string rule;
    std::string detail;
};

struct ExtractOptions {
    bool include_image_context = true;   // ablation: w/o I
    bool include_global_context = true;  // ablation: w/o G
    std::size_t answer_char_budget = 2048;
    int max_tokens = 512;
};

// Trims to the first sentence, enforces the character budget, and flags
// topic-phrase problems (advisory only). Violations are data, never errors.
std::pair<std::string, std::vector<AnswerViolation>> enforce_answer_constraints(
    std::string_view text, std::size_t char_budget = 2048);

Answer answer_question(const Question& question, const ThreatImage& image,
                       const ContextPair& contexts, Gateway& gateway,
                       const ExtractOptions& options = {},
                       std::vector<std::string>* warnings = nullptr);

}  // namespace ctig
