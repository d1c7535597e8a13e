#include "ctig/integrate.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "ctig/prompts.hpp"
#include "ctig/text_util.hpp"
#include "json.hpp"

namespace ctig {

std::string question_aspect(std::string_view question_text) {
    std::string text = collapse_whitespace(trim(question_text));
    while (!text.empty() && (text.back() == '?' || text.back() == '.')) text.pop_back();
    text = trim(text);

    std::string folded = fold_case(text);
    // "What is/are the XXX of/in the image" -> XXX
    static const char* openers[] = {"what is the", "what are the", "what is", "what are",
                                    "where is the", "where are the", "which", "how does the",
                                    "how is the"};
    for (const char* opener : openers) {
        std::string_view o = opener;
        if (folded.size() > o.size() && folded.rfind(o, 0) == 0 && folded[o.size()] == ' ') {
            text = trim(text.substr(o.size() + 1));
            folded = fold_case(text);
            break;
        }
    }
    static const char* tails[] = {" of the image", " in the image", " of this image",
                                  " in this image", " from the image", " shown in the image",
                                  " does the image show"};
    for (const char* tail : tails) {
        std::string_view t = tail;
        if (folded.size() > t.size() && folded.compare(folded.size() - t.size(), t.size(), t) == 0) {
            text = trim(text.substr(0, text.size() - t.size()));
            break;
        }
    }
    if (text.empty()) text = "main content";
    return text;
}

std::string render_reference(std::string_view aspect, std::string_view image_topic,
                             std::string_view answer_text) {
    std::string out = "This is the ";
    out += aspect;
    out += " of the ";
    out += image_topic;
    out += " as follows: ";
    out += answer_text;
    return out;
}

EnhancementReference build_reference(const ThreatImage& image, const Question& question,
                                     const Answer& answer, const std::string& image_topic,
                                     const RefinementConfig& config) {
    if (!answer.quality || config.accept_levels.count(answer.quality->level) == 0) {
        throw std::invalid_argument("build_reference: answer " + answer.question_id +
                                    " was not accepted");
    }
    if (!question.filter_label || *question.filter_label == FilterLabel::non_related) {
        throw std::invalid_argument("build_reference: question " + question.id +
                                    " was filtered out");
    }
    EnhancementReference ref;
    ref.image_id = image.id;
    ref.image_topic = image_topic;
    ref.question_id = question.id;
    ref.aspect = question_aspect(question.text);
    ref.answer_text = answer.text;
    ref.formatted = render_reference(ref.aspect, ref.image_topic, ref.answer_text);
    return ref;
}

std::string derive_image_topic(const ThreatImage& image,
                               const std::vector<std::pair<Question, Answer>>& answered) {
    static const std::string main_content_key =
        normalize_question("What is the main content of the image?");
    for (const auto& [question, answer] : answered) {
        if (normalize_question(question.text) != main_content_key) continue;
        if (!answer.quality) continue;
        if (answer.quality->level != QualityLevel::excellent &&
            answer.quality->level != QualityLevel::good) {
            continue;
        }
        // First clause of the main-content answer, without the terminator.
        std::string topic = answer.text;
        std::size_t comma = topic.find(',');
        if (comma != std::string::npos) topic = topic.substr(0, comma);
        while (!topic.empty() && (topic.back() == '.' || topic.back() == '!' || topic.back() == '?')) {
            topic.pop_back();
        }
        // Drop a leading "the image depicts/shows ..." frame if present.
        std::string folded = fold_case(topic);
        static const char* frames[] = {"the image depicts", "the image shows",
                                       "the image contains", "the image is",
                                       "the main content of the image is"};
        for (const char* frame : frames) {
            std::string_view f = frame;
            if (folded.rfind(f, 0) == 0) {
                topic = trim(topic.substr(f.size()));
                break;
            }
        }
        for (const char* article : {"a ", "an ", "the "}) {
            if (starts_with_ci(topic, article)) {
                topic = trim(topic.substr(std::string_view(article).size()));
                break;
            }
        }
        if (!topic.empty()) return topic;
    }
    if (image.image_type) {
        return fold_case(std::string(image_type_display(*image.image_type)));
    }
    return "threat image";
}

std::vector<GraphDelta> propose_deltas(const EnhancementReference& reference,
                                       const AttackGraph& graph,
                                       const std::vector<std::string>& ontology_vocab,
                                       const TechniqueCatalog& catalog, Gateway& gateway,
                                       std::vector<std::string>* warnings) {
    std::vector<std::string> technique_listing;
    for (const Technique& t : catalog.techniques()) {
        technique_listing.push_back(t.id + " - " + t.name);
    }

    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::propose_deltas(
        reference.formatted, graph_triplet_listing(graph), ontology_vocab, technique_listing)});
    req.messages.push_back(std::move(msg));

    std::string response = trim(gateway.complete(req));
    if (normalize_lookup(response) == "no match") return {};

    // Tolerate fenced output.
    if (response.rfind("```", 0) == 0) {
        std::size_t first_newline = response.find('\n');
        std::size_t last_fence = response.rfind("```");
        if (first_newline != std::string::npos && last_fence > first_newline) {
            response = trim(response.substr(first_newline + 1, last_fence - first_newline - 1));
        }
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception& e) {
        if (warnings != nullptr) {
            warnings->push_back("unparseable delta response for " + reference.question_id + ": " +
                                e.what());
        }
        return {};
    }
    if (doc.is_object()) doc = nlohmann::json::array({doc});
    if (!doc.is_array()) {
        if (warnings != nullptr) {
            warnings->push_back("delta response for " + reference.question_id +
                                " is neither an array nor No Match");
        }
        return {};
    }

    std::vector<GraphDelta> deltas;
    for (const auto& element : doc) {
        try {
            GraphDelta delta = GraphDelta::from_json(element);
            delta.source.image_id = reference.image_id;
            delta.source.question_id = reference.question_id;
            deltas.push_back(std::move(delta));
        } catch (const std::exception& e) {
            if (warnings != nullptr) {
                warnings->push_back("dropped malformed delta for " + reference.question_id + ": " +
                                    e.what());
            }
        }
    }
    return deltas;
}

IntegrationResult integrate_all(const AttackGraph& graph,
                                const std::vector<EnhancementReference>& references,
                                const std::vector<std::string>& ontology_vocab,
                                const TechniqueCatalog& catalog, Gateway& gateway) {
    IntegrationResult result;
    result.graph = graph;

    std::vector<EnhancementReference> ordered = references;
    std::sort(ordered.begin(), ordered.end(),
              [](const EnhancementReference& a, const EnhancementReference& b) {
                  return std::tie(a.image_id, a.question_id) < std::tie(b.image_id, b.question_id);
              });

    std::set<std::string> seen_identities;
    for (const EnhancementReference& reference : ordered) {
        std::vector<GraphDelta> deltas;
        try {
            deltas = propose_deltas(reference, result.graph, ontology_vocab, catalog, gateway,
                                    &result.warnings);
        } catch (const GatewayError& e) {
            result.warnings.push_back("delta proposal failed for " + reference.question_id + ": " +
                                      e.what());
            continue;
        }
        for (GraphDelta& delta : deltas) {
            if (!seen_identities.insert(delta.identity()).second) {
                result.rejected.emplace_back(std::move(delta), "duplicate delta");
                continue;
            }
            ApplyOutcome outcome = apply_delta(result.graph, delta, catalog);
            switch (outcome.status) {
                case ApplyStatus::applied:
                    result.graph = std::move(outcome.graph);
                    result.applied.push_back(std::move(delta));
                    break;
                case ApplyStatus::noop:
                    result.rejected.emplace_back(std::move(delta),
                                                 "no-op: contribution already present");
                    break;
                case ApplyStatus::rejected:
                    result.rejected.emplace_back(std::move(delta), outcome.reason);
                    break;
            }
        }
    }
    return result;
}

}  // namespace ctig
