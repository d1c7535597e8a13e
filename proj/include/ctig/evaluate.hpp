#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctig/brainstorm.hpp"
#include "ctig/graph.hpp"

namespace ctig {

struct EvaluateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GoldAnnotation {
    std::vector<std::pair<std::string, std::string>> entities;  // name, type
    std::vector<std::array<std::string, 3>> relations;          // subject, relation, object
    std::vector<std::string> techniques;                        // ids

    static GoldAnnotation from_json(const nlohmann::json& doc);
    static GoldAnnotation load(const std::filesystem::path& path);
};

struct MatchConfig {
    double fuzzy_threshold = 0.85;
};

struct CategoryMetrics {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

CategoryMetrics make_metrics(int tp, int fp, int fn);

struct MetricReport {
    CategoryMetrics entity;
    CategoryMetrics relation;
    CategoryMetrics technique;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

// Greedy highest-similarity-first one-to-one matching over normalized
// names; ties broken on the side-independent (min, max) name pair.
std::vector<std::pair<std::string, std::string>> match_entities(
    const std::vector<std::string>& pred, const std::vector<std::string>& gold,
    const MatchConfig& cfg);

MetricReport score(const AttackGraph& pred, const GoldAnnotation& gold,
                   const MatchConfig& cfg = {});

// Multimodal gain over the text-only graph; delegates to diff_graphs.
GainReport gain_report(const AttackGraph& text_graph, const AttackGraph& mm_graph);

struct QuestionDistribution {
    std::map<FilterLabel, int> counts;
    std::map<FilterLabel, double> proportions;
    int total = 0;

    nlohmann::json to_json() const;
};

// Throws on empty input or any unlabeled question.
QuestionDistribution question_distribution(const std::vector<QuestionPool>& pools);

}  // namespace ctig
