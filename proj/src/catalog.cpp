#include "ctig/catalog.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ctig/text_util.hpp"
#include "json.hpp"

namespace ctig {

bool is_valid_technique_id(std::string_view id) {
    // T\d{4}(\.\d{3})?
    if (id.size() != 5 && id.size() != 9) return false;
    if (id[0] != 'T') return false;
    for (int i = 1; i <= 4; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    }
    if (id.size() == 9) {
        if (id[5] != '.') return false;
        for (int i = 6; i <= 8; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
        }
    }
    return true;
}

std::pair<std::string, std::string> parse_technique_string(std::string_view s) {
    std::size_t sep = s.find(" - ");
    if (sep == std::string_view::npos) {
        throw CatalogError("unparseable technique string: \"" + std::string(s) + "\"");
    }
    std::string id = trim(s.substr(0, sep));
    std::string name = trim(s.substr(sep + 3));
    if (!is_valid_technique_id(id)) {
        throw CatalogError("malformed technique id in \"" + std::string(s) + "\"");
    }
    return {id, name};
}

TechniqueCatalog TechniqueCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CatalogError("cannot open catalog file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError("invalid catalog JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw CatalogError("catalog file must be a JSON array: " + path.string());
    }
    std::vector<Technique> techniques;
    techniques.reserve(doc.size());
    for (const auto& row : doc) {
        Technique t;
        t.id = row.value("id", "");
        t.name = row.value("name", "");
        t.tactic = row.value("tactic", "");
        techniques.push_back(std::move(t));
    }
    return from_techniques(std::move(techniques));
}

TechniqueCatalog TechniqueCatalog::from_techniques(std::vector<Technique> techniques) {
    TechniqueCatalog catalog;
    for (Technique& t : techniques) {
        if (!is_valid_technique_id(t.id)) {
            throw CatalogError("malformed technique id: \"" + t.id + "\"");
        }
        if (catalog.by_id_.count(t.id) != 0) {
            throw CatalogError("duplicate technique id: " + t.id);
        }
        catalog.id_by_normalized_name_.emplace(normalize_lookup(t.name), t.id);
        catalog.by_id_.emplace(t.id, std::move(t));
    }
    return catalog;
}

std::optional<Technique> TechniqueCatalog::lookup(std::string_view query,
                                                  double fuzzy_threshold) const {
    std::string trimmed = trim(query);
    auto id_hit = by_id_.find(trimmed);
    if (id_hit != by_id_.end()) return id_hit->second;

    std::string normalized = normalize_lookup(trimmed);
    auto name_hit = id_by_normalized_name_.find(normalized);
    if (name_hit != id_by_normalized_name_.end()) {
        return by_id_.at(name_hit->second);
    }

    // Ascending id order, so ties keep the lowest technique id.
    const Technique* best = nullptr;
    double best_score = 0.0;
    for (const auto& [id, t] : by_id_) {
        double score = token_jaccard(normalized, t.name);
        if (score > best_score) {
            best = &t;
            best_score = score;
        }
    }
    if (best != nullptr && best_score >= fuzzy_threshold && best_score > 0.0) {
        // Threshold 1.0 degenerates to exact token-set equality.
        return *best;
    }
    return std::nullopt;
}

bool TechniqueCatalog::contains_id(std::string_view id) const {
    return by_id_.count(std::string(id)) != 0;
}

std::vector<Technique> TechniqueCatalog::techniques() const {
    std::vector<Technique> out;
    out.reserve(by_id_.size());
    for (const auto& [id, t] : by_id_) out.push_back(t);
    return out;
}

}  // namespace ctig
