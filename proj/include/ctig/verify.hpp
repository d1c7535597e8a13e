#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctig/extract.hpp"
#include "ctig/quality.hpp"

namespace ctig {

struct VerifyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Paradigm { q_led, a_iteration };
std::string_view paradigm_name(Paradigm p);
std::optional<Paradigm> paradigm_from_name(std::string_view s);

struct RefinementConfig {
    Paradigm paradigm = Paradigm::a_iteration;
    int max_rounds = 4;
    std::set<QualityLevel> accept_levels = {QualityLevel::excellent, QualityLevel::good};
};

inline const std::vector<std::string> kDefaultFailingPhrases = {
    "unknown", "no details", "not mentioned", "cannot be determined", "unclear",
};

struct VerifyOptions {
    std::vector<std::string> failing_phrases = kDefaultFailingPhrases;
    bool assess_dimensions = false;  // extra 1-5 scoring call
};

// True when the text hedges; forces level = failing with no gateway call.
bool lexical_failing_check(std::string_view text,
                           const std::vector<std::string>& phrases = kDefaultFailingPhrases);

QualityAssessment assess_answer(const Answer& answer, const Question& question,
                                const ThreatImage& image, Gateway& gateway,
                                const VerifyOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);

// Stage 1: is the question itself phrased in domain terms?
std::optional<FilterLabel> filter_question_direct(const Question& question,
                                                  const std::string& graph_summary,
                                                  Gateway& gateway,
                                                  std::vector<std::string>* warnings = nullptr);

// Stage 2: does the round-1 answer carry usable threat information?
FilterLabel filter_question_answer_oriented(const Question& question, const Answer& answer,
                                            Gateway& gateway,
                                            std::vector<std::string>* warnings = nullptr);

// Iterative refinement; returns the final answer with full round history.
Answer refine_answer(Answer answer, const Question& question, const ThreatImage& image,
                     const ContextPair& contexts, const RefinementConfig& config,
                     Gateway& gateway, const VerifyOptions& verify_options = {},
                     const ExtractOptions& extract_options = {},
                     std::vector<std::string>* warnings = nullptr);

struct QualityDistributionRow {
    int round = 1;
    std::map<QualityLevel, int> counts;
    int total = 0;
    double positive_fraction = 0.0;  // excellent + good
};

std::vector<QualityDistributionRow> quality_distribution(const std::vector<Answer>& answers);

}  // namespace ctig
