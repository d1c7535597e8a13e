#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ctig {

enum class QualityLevel { excellent, good, satisfactory, failing };

std::string_view quality_level_name(QualityLevel l);
std::optional<QualityLevel> quality_level_from_name(std::string_view s);

struct QualityAssessment {
    QualityLevel level = QualityLevel::failing;
    // Optional 1-5 scores for accuracy, consistency, completeness, relevance.
    std::optional<std::map<std::string, int>> dimension_scores;
    std::optional<std::string> comment;     // answer-iteration guidance
    std::optional<std::string> suggestion;  // question-led parsing guide

    bool operator==(const QualityAssessment&) const = default;
};

}  // namespace ctig
