#include "ctig/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "ctig/text_util.hpp"

namespace ctig {

GoldAnnotation GoldAnnotation::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw EvaluateError("gold annotation must be a JSON object");
    GoldAnnotation gold;
    if (doc.contains("entities")) {
        for (const auto& row : doc["entities"]) {
            std::string name = row.value("name", "");
            if (name.empty()) throw EvaluateError("gold entity without a name");
            gold.entities.emplace_back(name, row.value("type", ""));
        }
    }
    if (doc.contains("relations")) {
        for (const auto& row : doc["relations"]) {
            std::string subject = row.value("subject", "");
            std::string relation = row.value("relation", "");
            std::string object = row.value("object", "");
            if (subject.empty() || relation.empty() || object.empty()) {
                throw EvaluateError("gold relation needs subject, relation, and object");
            }
            gold.relations.push_back({subject, relation, object});
        }
    }
    if (doc.contains("techniques")) {
        for (const auto& row : doc["techniques"]) {
            std::string id = row.get<std::string>();
            if (!is_valid_technique_id(id)) {
                throw EvaluateError("gold technique id \"" + id + "\" does not match the pattern");
            }
            gold.techniques.push_back(std::move(id));
        }
    }
    return gold;
}

GoldAnnotation GoldAnnotation::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvaluateError("cannot open gold file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw EvaluateError("invalid gold JSON: " + std::string(e.what()));
    }
    return from_json(doc);
}

CategoryMetrics make_metrics(int tp, int fp, int fn) {
    CategoryMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct Candidate {
    double similarity;
    std::string low;   // min(pred, gold), side-independent tie order
    std::string high;  // max(pred, gold)
    std::size_t pred_index;
    std::size_t gold_index;
};

}  // namespace

std::vector<std::pair<std::string, std::string>> match_entities(
    const std::vector<std::string>& pred, const std::vector<std::string>& gold,
    const MatchConfig& cfg) {
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        for (std::size_t g = 0; g < gold.size(); ++g) {
            std::string np = normalize_name(pred[p]);
            std::string ng = normalize_name(gold[g]);
            double similarity = np == ng ? 1.0 : token_jaccard(np, ng);
            if (similarity >= cfg.fuzzy_threshold && similarity > 0.0) {
                candidates.push_back({similarity, std::min(np, ng), std::max(np, ng), p, g});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(b.similarity, a.low, a.high, a.pred_index) <
               std::tie(a.similarity, b.low, b.high, b.pred_index);
    });

    std::vector<bool> pred_used(pred.size(), false), gold_used(gold.size(), false);
    std::vector<std::pair<std::string, std::string>> matching;
    for (const Candidate& c : candidates) {
        if (pred_used[c.pred_index] || gold_used[c.gold_index]) continue;
        pred_used[c.pred_index] = true;
        gold_used[c.gold_index] = true;
        matching.emplace_back(pred[c.pred_index], gold[c.gold_index]);
    }
    return matching;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

std::vector<std::string> unique_entity_names(const AttackGraph& g) {
    std::set<std::string> seen;
    std::vector<std::string> names;
    for (const Entity& e : g.entities) {
        if (seen.insert(normalize_name(e.name)).second) names.push_back(e.name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

struct RelationTuple {
    std::string subject;
    std::string label;
    std::string object;
};

std::vector<RelationTuple> graph_relations(const AttackGraph& g) {
    std::vector<RelationTuple> tuples;
    std::set<std::string> seen;
    auto display = [&](const std::string& id) {
        const Entity* e = g.find_entity(id);
        return e != nullptr ? e->name : id;
    };
    auto add = [&](const std::string& s, const std::string& label, const std::string& o) {
        std::string key = normalize_name(s) + "|" + normalize_name(label) + "|" + normalize_name(o);
        if (seen.insert(key).second) tuples.push_back({s, label, o});
    };
    for (const AtomicEvent& ev : g.events) {
        add(display(ev.subject), ev.action, display(ev.object));
    }
    for (const SupplementaryRelation& r : g.supplementary) {
        add(display(r.subject), r.relation, display(r.object));
    }
    return tuples;
}

std::vector<RelationTuple> gold_relation_tuples(const GoldAnnotation& gold) {
    std::vector<RelationTuple> tuples;
    std::set<std::string> seen;
    for (const auto& r : gold.relations) {
        std::string key =
            normalize_name(r[0]) + "|" + normalize_name(r[1]) + "|" + normalize_name(r[2]);
        if (seen.insert(key).second) tuples.push_back({r[0], r[1], r[2]});
    }
    return tuples;
}

}  // namespace

MetricReport score(const AttackGraph& pred, const GoldAnnotation& gold, const MatchConfig& cfg) {
    MetricReport report;

    // Entities: one-to-one fuzzy matching over unique normalized names.
    std::vector<std::string> pred_names = unique_entity_names(pred);
    std::set<std::string> gold_seen;
    std::vector<std::string> gold_names;
    for (const auto& [name, type] : gold.entities) {
        if (gold_seen.insert(normalize_name(name)).second) gold_names.push_back(name);
    }
    auto entity_matching = match_entities(pred_names, gold_names, cfg);
    int tp = static_cast<int>(entity_matching.size());
    report.entity = make_metrics(tp, static_cast<int>(pred_names.size()) - tp,
                                 static_cast<int>(gold_names.size()) - tp);

    // Relations count only when both endpoints matched and the labels agree
    // at the threshold.
    std::map<std::string, std::string> pred_to_gold;
    for (const auto& [p, g] : entity_matching) {
        pred_to_gold[normalize_name(p)] = normalize_name(g);
    }
    std::vector<RelationTuple> pred_rel = graph_relations(pred);
    std::vector<RelationTuple> gold_rel = gold_relation_tuples(gold);
    std::vector<bool> gold_rel_used(gold_rel.size(), false);
    int rel_tp = 0;
    for (const RelationTuple& pr : pred_rel) {
        auto subject_hit = pred_to_gold.find(normalize_name(pr.subject));
        auto object_hit = pred_to_gold.find(normalize_name(pr.object));
        if (subject_hit == pred_to_gold.end() || object_hit == pred_to_gold.end()) continue;
        for (std::size_t i = 0; i < gold_rel.size(); ++i) {
            if (gold_rel_used[i]) continue;
            const RelationTuple& gr = gold_rel[i];
            if (normalize_name(gr.subject) != subject_hit->second) continue;
            if (normalize_name(gr.object) != object_hit->second) continue;
            std::string pl = normalize_name(pr.label);
            std::string gl = normalize_name(gr.label);
            double label_similarity = pl == gl ? 1.0 : token_jaccard(pl, gl);
            if (label_similarity >= cfg.fuzzy_threshold) {
                gold_rel_used[i] = true;
                ++rel_tp;
                break;
            }
        }
    }
    report.relation = make_metrics(rel_tp, static_cast<int>(pred_rel.size()) - rel_tp,
                                   static_cast<int>(gold_rel.size()) - rel_tp);

    // Techniques: exact id equality; sub-techniques never match parents.
    std::set<std::string> pred_techniques;
    for (const AtomicEvent& ev : pred.events) {
        pred_techniques.insert(ev.techniques.begin(), ev.techniques.end());
    }
    std::set<std::string> gold_techniques(gold.techniques.begin(), gold.techniques.end());
    int tech_tp = 0;
    for (const std::string& id : pred_techniques) {
        if (gold_techniques.count(id) != 0) ++tech_tp;
    }
    report.technique =
        make_metrics(tech_tp, static_cast<int>(pred_techniques.size()) - tech_tp,
                     static_cast<int>(gold_techniques.size()) - tech_tp);
    return report;
}

GainReport gain_report(const AttackGraph& text_graph, const AttackGraph& mm_graph) {
    return diff_graphs(text_graph, mm_graph);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::json metrics_json(const CategoryMetrics& m) {
    return {{"tp", m.tp},           {"fp", m.fp},         {"fn", m.fn},
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
    return {{"entity", metrics_json(entity)},
            {"relation", metrics_json(relation)},
            {"technique", metrics_json(technique)}};
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    auto row = [&](const char* name, const CategoryMetrics& m) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-10s %6d %6d %6d %10.4f %10.4f %10.4f\n", name, m.tp,
                      m.fp, m.fn, m.precision, m.recall, m.f1);
        out << line;
    };
    out << "category       tp     fp     fn  precision     recall         f1\n";
    row("entity", entity);
    row("relation", relation);
    row("technique", technique);
    return out.str();
}

nlohmann::json QuestionDistribution::to_json() const {
    nlohmann::json j;
    j["total"] = total;
    for (const auto& [label, count] : counts) {
        std::string name(filter_label_name(label));
        j["counts"][name] = count;
        double proportion = proportions.at(label);
        j["proportions"][name] = std::round(proportion * 10000.0) / 10000.0;
    }
    return j;
}

QuestionDistribution question_distribution(const std::vector<QuestionPool>& pools) {
    QuestionDistribution dist;
    dist.counts[FilterLabel::direct_correlation] = 0;
    dist.counts[FilterLabel::answer_oriented] = 0;
    dist.counts[FilterLabel::non_related] = 0;
    for (const QuestionPool& pool : pools) {
        for (const Question& q : pool.questions) {
            if (!q.filter_label) {
                throw EvaluateError("question " + q.id + " is unlabeled");
            }
            dist.counts[*q.filter_label] += 1;
            dist.total += 1;
        }
    }
    if (dist.total == 0) {
        throw EvaluateError("question distribution is undefined for empty input");
    }
    for (const auto& [label, count] : dist.counts) {
        dist.proportions[label] = static_cast<double>(count) / static_cast<double>(dist.total);
    }
    return dist;
}

}  // namespace ctig
