#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctig/corpus.hpp"

namespace ctig::prompts {

// Shared support-context block; either side may be absent.
std::string context_block(std::string_view image_aware, std::string_view global);

std::string summarize_passage(std::string_view passage);
std::string summarize_report(std::string_view text);
std::string combine_summaries(const std::vector<std::string>& summaries);

std::string classify_image(const ContextPair& contexts);

std::string generate_general_questions(const std::vector<std::string>& leading_questions,
                                       const ContextPair& contexts);
std::string generate_task_questions(std::string_view graph_summary, const ContextPair& contexts);

std::string answer_question(std::string_view question, std::string_view image_aware,
                            std::string_view global);

std::string evaluate_answer(std::string_view question, std::string_view answer);
std::string score_dimensions(std::string_view question, std::string_view answer);

// Guidance for the next refinement round.
std::string optimization_comment(std::string_view question, std::string_view answer);
std::string refinement_suggestion(std::string_view question, std::string_view answer);

// Re-answer prompts for the two paradigms.
std::string refine_with_comment(std::string_view question, std::string_view previous_answer,
                                std::string_view comment, std::string_view image_aware,
                                std::string_view global);
std::string refine_with_suggestion(std::string_view question, std::string_view suggestion,
                                   std::string_view image_aware, std::string_view global);

std::string filter_direct(std::string_view question, std::string_view graph_summary);
std::string filter_answer_oriented(std::string_view question, std::string_view answer);

std::string prefilter_screen(char rule);

std::string propose_deltas(std::string_view reference, std::string_view triplet_listing,
                           const std::vector<std::string>& ontology_vocab,
                           const std::vector<std::string>& technique_listing);

}  // namespace ctig::prompts
