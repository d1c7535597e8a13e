#include "ctig/prompts.hpp"

#include <sstream>

namespace ctig::prompts {

namespace {

constexpr const char* kAnalystRole = "You are a cybersecurity threat intelligence analyst.";

}  // namespace

std::string context_block(std::string_view image_aware, std::string_view global) {
    std::string out;
    if (!image_aware.empty()) {
        out += "Image context:\n";
        out += image_aware;
        out += "\n\n";
    }
    if (!global.empty()) {
        out += "Report summary:\n";
        out += global;
        out += "\n\n";
    }
    return out;
}

std::string summarize_passage(std::string_view passage) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Summarize the following passage from a CTI report in at most three sentences. "
        << "Keep every entity name, file name, tool, and threat action that appears.\n\n"
        << passage;
    return out.str();
}

std::string summarize_report(std::string_view text) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Write a short abstract of the following CTI report in at most five sentences, "
        << "covering the threat actor, the malware or tooling involved, and the overall "
        << "attack flow.\n\n"
        << text;
    return out.str();
}

std::string combine_summaries(const std::vector<std::string>& summaries) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "The following are partial summaries of consecutive sections of one CTI report. "
        << "Merge them into a single abstract of at most five sentences.\n";
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        out << "\nSection " << (i + 1) << ":\n" << summaries[i] << "\n";
    }
    return out.str();
}

std::string classify_image(const ContextPair& contexts) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Classify the attached CTI report image into exactly one of these categories:\n";
    for (ImageType t : kAllImageTypes) {
        out << "- " << image_type_display(t) << "\n";
    }
    out << "\n" << context_block(contexts.image_aware, contexts.global);
    out << "Answer with the category name only.";
    return out.str();
}

std::string generate_general_questions(const std::vector<std::string>& leading_questions,
                                       const ContextPair& contexts) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Given the attached threat image, write new questions that probe further "
        << "attributes of the image itself. Rules:\n"
        << "1. Do not repeat the existing questions below; cover other perspectives and details.\n"
        << "2. Every question must be useful for cyber threat analysis.\n"
        << "3. Follow the pattern \"What is/are the XXX of/in the image?\" where XXX names a "
           "specific aspect.\n"
        << "4. Output one question per line with no numbering or commentary.\n\n"
        << "Existing questions:\n";
    for (const std::string& q : leading_questions) out << "- " << q << "\n";
    out << "\n" << context_block(contexts.image_aware, contexts.global);
    return out.str();
}

std::string generate_task_questions(std::string_view graph_summary, const ContextPair& contexts) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "An attack graph was extracted from the text of the report the attached image "
        << "belongs to. Write questions that connect the image to that graph: missing steps, "
        << "entities, orderings, or techniques the image may reveal. Rules:\n"
        << "1. Each question must target the attack-graph construction task, not image trivia.\n"
        << "2. Follow the interrogative pattern \"What is/are the XXX of/in the image?\" or "
           "\"What ... does the image show?\".\n"
        << "3. Output one question per line with no numbering or commentary.\n\n"
        << "Attack graph:\n"
        << graph_summary << "\n\n"
        << context_block(contexts.image_aware, contexts.global);
    return out.str();
}

std::string answer_question(std::string_view question, std::string_view image_aware,
                            std::string_view global) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Answer the question about the attached threat image. Rules:\n"
        << "1. Mention only entities, objects, and relationships visible in the image.\n"
        << "2. Start the answer with a topic phrase naming what the question asks about.\n"
        << "3. Answer in a single, concise sentence.\n"
        << "4. Give only the direct answer; no explanations and no uncertainty remarks.\n\n"
        << context_block(image_aware, global) << "Question: " << question;
    return out.str();
}

std::string evaluate_answer(std::string_view question, std::string_view answer) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Rate the description below against the attached image. Criteria: accuracy (does it "
        << "answer the question), consistency (does it stick to the image content), completeness "
        << "(does it cover what the question needs), relevance (is it useful for cyber threat "
        << "analysis).\n"
        << "Scale:\n"
        << "- \"excellent\": meets three criteria with only minor flaws.\n"
        << "- \"good\": meets two criteria with small deviations that do not hurt overall quality.\n"
        << "- \"satisfactory\": meets two criteria but with noticeable flaws.\n"
        << "- \"failing\": meets at most one criterion, or hedges instead of answering.\n"
        << "Reply with a single word: excellent, good, satisfactory, or failing.\n\n"
        << "Question: " << question << "\n"
        << "Description: " << answer;
    return out.str();
}

std::string score_dimensions(std::string_view question, std::string_view answer) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Score the description below against the attached image on four dimensions, each an "
        << "integer from 1 (worst) to 5 (best). Reply with four lines in the form "
        << "\"dimension: score\" for accuracy, consistency, completeness, and relevance.\n\n"
        << "Question: " << question << "\n"
        << "Description: " << answer;
    return out.str();
}

std::string optimization_comment(std::string_view question, std::string_view answer) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "The answer below was judged not good enough. Looking at the attached image, state in "
        << "one or two sentences what the answer gets wrong or misses and how to fix it.\n\n"
        << "Question: " << question << "\n"
        << "Answer: " << answer;
    return out.str();
}

std::string refinement_suggestion(std::string_view question, std::string_view answer) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "The answer below was judged not good enough. Looking at the attached image, write a "
        << "short parsing guide (not a correction of the answer) describing which parts of the "
        << "image the next attempt should examine to answer the question well.\n\n"
        << "Question: " << question << "\n"
        << "Answer: " << answer;
    return out.str();
}

std::string refine_with_comment(std::string_view question, std::string_view previous_answer,
                                std::string_view comment, std::string_view image_aware,
                                std::string_view global) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Improve the previous answer using the reviewer comment and the attached image. "
        << "Rules:\n"
        << "1. The revised answer must satisfy accuracy, consistency, completeness, and "
           "relevance.\n"
        << "2. The revised answer must differ from the previous answer.\n"
        << "3. Answer in a single, concise sentence with a topic phrase.\n\n"
        << context_block(image_aware, global) << "Question: " << question << "\n"
        << "Previous answer: " << previous_answer << "\n"
        << "Reviewer comment: " << comment;
    return out.str();
}

std::string refine_with_suggestion(std::string_view question, std::string_view suggestion,
                                   std::string_view image_aware, std::string_view global) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Answer the question about the attached image, strictly following the parsing guide. "
        << "Rules:\n"
        << "1. The answer must satisfy accuracy, consistency, completeness, and relevance.\n"
        << "2. Answer in a single, concise sentence with a topic phrase.\n\n"
        << context_block(image_aware, global) << "Question: " << question << "\n"
        << "Parsing guide: " << suggestion;
    return out.str();
}

std::string filter_direct(std::string_view question, std::string_view graph_summary) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Judge whether the question below is itself phrased in cybersecurity terms that make "
        << "it directly useful for extending the attack graph summarized underneath. "
        << "Reply yes or no.\n\n"
        << "Question: " << question << "\n\n"
        << "Attack graph:\n"
        << graph_summary;
    return out.str();
}

std::string filter_answer_oriented(std::string_view question, std::string_view answer) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "The question below is not phrased in domain terms, but its answer may still carry "
        << "threat information. Judge whether the answer contributes concrete material (entities, "
        << "actions, indicators, techniques) for attack-graph construction. Reply yes or no.\n\n"
        << "Question: " << question << "\n"
        << "Answer: " << answer;
    return out.str();
}

std::string prefilter_screen(char rule) {
    std::ostringstream out;
    out << kAnalystRole << "\n";
    switch (rule) {
        case 'a':
            out << "Does the attached image mainly contain a logo, branding, or advertisement "
                   "rather than threat content? Reply yes or no.";
            break;
        case 'b':
            out << "Is the attached image heavily occluded or covered by a strong watermark? "
                   "Reply yes or no.";
            break;
        default:
            out << "Is the attached image too weakly informative to support threat analysis "
                   "(no readable structure, text, or indicators)? Reply yes or no.";
            break;
    }
    return out.str();
}

std::string propose_deltas(std::string_view reference, std::string_view triplet_listing,
                           const std::vector<std::string>& ontology_vocab,
                           const std::vector<std::string>& technique_listing) {
    std::ostringstream out;
    out << kAnalystRole << "\n"
        << "Use the image-derived reference below to extend the attack graph. Propose zero or "
        << "more enhancements of these kinds:\n"
        << "1. new_node_addition: a new entity connected to an existing one. Object keys: type, "
           "description, new_node {id, type, properties {description}}, relationship {subject, "
           "subject_type, relation, object, object_type}.\n"
        << "2. new_relationship_addition: a new or replacement link between existing entities. "
           "Object keys: type, description, relationship {subject, subject_type, relation, "
           "object, object_type}, replace_existing (boolean).\n"
        << "3. technique_addition: a technique id for an existing link. Object keys: type, "
           "description, target_relationship {subject, relation, object}, new_techniques "
           "[\"technique_id - technique_name\"].\n"
        << "Rules:\n"
        << "- Use active-voice verb phrases for relations.\n"
        << "- Entity types must come from the vocabulary below; techniques from the list below.\n"
        << "- Output a JSON array of enhancement objects only when the reference strongly "
           "supports them; otherwise output No Match.\n\n"
        << "Reference: " << reference << "\n\n"
        << "Attack graph:\n"
        << triplet_listing << "\n"
        << "Entity type vocabulary: ";
    for (std::size_t i = 0; i < ontology_vocab.size(); ++i) {
        if (i > 0) out << ", ";
        out << ontology_vocab[i];
    }
    out << "\n\nTechniques:\n";
    for (const std::string& t : technique_listing) out << "- " << t << "\n";
    return out.str();
}

}  // namespace ctig::prompts
