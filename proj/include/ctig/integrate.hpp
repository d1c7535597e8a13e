#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctig/brainstorm.hpp"
#include "ctig/extract.hpp"
#include "ctig/graph.hpp"
#include "ctig/verify.hpp"

namespace ctig {

struct EnhancementReference {
    std::string image_id;
    std::string image_topic;
    std::string question_id;
    std::string aspect;
    std::string answer_text;
    std::string formatted;  // rendered template
};

// "main content" from "What is the main content of the image?".
std::string question_aspect(std::string_view question_text);

std::string render_reference(std::string_view aspect, std::string_view image_topic,
                             std::string_view answer_text);

// Preconditions: the answer was accepted and the question labeled
// direct_correlation or answer_oriented.
EnhancementReference build_reference(const ThreatImage& image, const Question& question,
                                     const Answer& answer, const std::string& image_topic,
                                     const RefinementConfig& config = {});

// Topic = answer to the main-content question when one was accepted,
// otherwise the classified category.
std::string derive_image_topic(const ThreatImage& image,
                               const std::vector<std::pair<Question, Answer>>& answered);

std::vector<GraphDelta> propose_deltas(const EnhancementReference& reference,
                                       const AttackGraph& graph,
                                       const std::vector<std::string>& ontology_vocab,
                                       const TechniqueCatalog& catalog, Gateway& gateway,
                                       std::vector<std::string>* warnings = nullptr);

struct IntegrationResult {
    AttackGraph graph;
    std::vector<GraphDelta> applied;
    std::vector<std::pair<GraphDelta, std::string>> rejected;  // delta, reason
    std::vector<std::string> warnings;
};

// References processed in (image_id, question_id) order; duplicate deltas
// suppressed by identity; every failure becomes a rejected entry.
IntegrationResult integrate_all(const AttackGraph& graph,
                                const std::vector<EnhancementReference>& references,
                                const std::vector<std::string>& ontology_vocab,
                                const TechniqueCatalog& catalog, Gateway& gateway);

inline const std::vector<std::string> kDefaultOntologyVocab = {
    "actor",  "campaign",       "domain", "file",   "identity", "infrastructure", "ip-address",
    "malware", "network-traffic", "process", "tool",  "url",      "vulnerability",
};

}  // namespace ctig
