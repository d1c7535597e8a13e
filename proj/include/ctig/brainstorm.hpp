#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctig/corpus.hpp"
#include "ctig/gateway.hpp"

namespace ctig {

struct BrainstormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class QuestionKind { general, task_specific };
std::string_view question_kind_name(QuestionKind k);
std::optional<QuestionKind> question_kind_from_name(std::string_view s);

enum class FilterLabel { direct_correlation, answer_oriented, non_related };
std::string_view filter_label_name(FilterLabel l);
std::optional<FilterLabel> filter_label_from_name(std::string_view s);

struct Question {
    std::string id;        // assigned by build_pool: q-<image>-<index>
    std::string image_id;
    std::string text;
    QuestionKind kind = QuestionKind::general;
    std::optional<FilterLabel> filter_label;
};

struct QuestionPool {
    std::string image_id;
    std::vector<Question> questions;
};

// Seed questions per image type, all seven types required.
class LeadingQuestionBank {
public:
    static LeadingQuestionBank load(const std::filesystem::path& path);
    static LeadingQuestionBank from_map(std::map<ImageType, std::vector<std::string>> seeds);

    const std::vector<std::string>& for_type(ImageType t) const;

private:
    std::map<ImageType, std::vector<std::string>> seeds_;
};

std::vector<Question> generate_general_questions(const ThreatImage& image,
                                                 const LeadingQuestionBank& bank,
                                                 const ContextPair& contexts, Gateway& gateway,
                                                 std::vector<std::string>* warnings = nullptr);

std::vector<Question> generate_task_questions(const ThreatImage& image,
                                              const std::string& graph_summary,
                                              const ContextPair& contexts, Gateway& gateway,
                                              std::vector<std::string>* warnings = nullptr);

// Concatenates, dedups by normalized text, caps the pool, assigns stable ids.
QuestionPool build_pool(const std::vector<Question>& general,
                        const std::vector<Question>& task_specific, std::size_t cap = 40);

// Mean pairwise token-set Jaccard; 1 = all questions identical.
double mean_pairwise_similarity(const std::vector<std::string>& texts);
double pool_monotonicity(const QuestionPool& pool);

}  // namespace ctig
