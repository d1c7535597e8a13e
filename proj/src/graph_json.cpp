#include <algorithm>
#include <fstream>
#include <tuple>

#include "ctig/graph.hpp"

namespace ctig {

namespace {

auto event_order(const AtomicEvent& e) {
    return std::tie(e.timestamp, e.subject, e.action, e.object, e.techniques);
}

auto supplementary_order(const SupplementaryRelation& r) {
    return std::tie(r.subject, r.relation, r.object);
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& path,
                              const char* key, const char* type_name) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing required field");
    bool ok = false;
    std::string_view t = type_name;
    if (t == "string") ok = it->is_string();
    else if (t == "array") ok = it->is_array();
    else if (t == "object") ok = it->is_object();
    else if (t == "integer") ok = it->is_number_integer();
    if (!ok) throw SchemaError(path + "." + key, std::string("expected ") + type_name);
    return *it;
}

Provenance parse_provenance(const nlohmann::json& j, const std::string& path) {
    if (!j.contains("provenance")) return Provenance::text;
    if (!j["provenance"].is_string()) throw SchemaError(path + ".provenance", "expected string");
    auto p = provenance_from_name(j["provenance"].get<std::string>());
    if (!p) {
        throw SchemaError(path + ".provenance",
                          "must be one of text, image, merged; got \"" +
                              j["provenance"].get<std::string>() + "\"");
    }
    return *p;
}

}  // namespace

AttackGraph canonicalize(const AttackGraph& g) {
    AttackGraph out = g;
    std::sort(out.entities.begin(), out.entities.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });
    for (AtomicEvent& ev : out.events) {
        std::sort(ev.techniques.begin(), ev.techniques.end());
        ev.techniques.erase(std::unique(ev.techniques.begin(), ev.techniques.end()),
                            ev.techniques.end());
    }
    std::sort(out.events.begin(), out.events.end(),
              [](const AtomicEvent& a, const AtomicEvent& b) {
                  return event_order(a) < event_order(b);
              });
    std::sort(out.supplementary.begin(), out.supplementary.end(),
              [](const SupplementaryRelation& a, const SupplementaryRelation& b) {
                  return supplementary_order(a) < supplementary_order(b);
              });
    return out;
}

std::string to_canonical_json(const AttackGraph& g) {
    AttackGraph c = canonicalize(g);
    nlohmann::json doc;
    doc["report_id"] = c.report_id;
    doc["entities"] = nlohmann::json::array();
    for (const Entity& e : c.entities) {
        doc["entities"].push_back({{"id", e.id},
                                   {"name", e.name},
                                   {"type", e.entity_type},
                                   {"description", e.description},
                                   {"provenance", std::string(provenance_name(e.provenance))}});
    }
    doc["events"] = nlohmann::json::array();
    for (const AtomicEvent& ev : c.events) {
        doc["events"].push_back({{"subject", ev.subject},
                                 {"action", ev.action},
                                 {"object", ev.object},
                                 {"timestamp", ev.timestamp},
                                 {"techniques", ev.techniques},
                                 {"provenance", std::string(provenance_name(ev.provenance))}});
    }
    doc["supplementary"] = nlohmann::json::array();
    for (const SupplementaryRelation& r : c.supplementary) {
        doc["supplementary"].push_back(
            {{"subject", r.subject}, {"relation", r.relation}, {"object", r.object}});
    }
    doc["metadata"] = c.metadata;
    return doc.dump(2) + "\n";
}

AttackGraph graph_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("$", "graph document must be a JSON object");
    AttackGraph g;
    g.report_id = require(doc, "$", "report_id", "string").get<std::string>();

    const auto& entities = require(doc, "$", "entities", "array");
    for (std::size_t i = 0; i < entities.size(); ++i) {
        std::string path = "$.entities[" + std::to_string(i) + "]";
        const auto& row = entities[i];
        if (!row.is_object()) throw SchemaError(path, "expected object");
        Entity e;
        e.id = require(row, path, "id", "string").get<std::string>();
        e.name = require(row, path, "name", "string").get<std::string>();
        e.entity_type = require(row, path, "type", "string").get<std::string>();
        if (row.contains("description")) {
            if (!row["description"].is_string()) throw SchemaError(path + ".description", "expected string");
            e.description = row["description"].get<std::string>();
        }
        e.provenance = parse_provenance(row, path);
        g.entities.push_back(std::move(e));
    }

    const auto& events = require(doc, "$", "events", "array");
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::string path = "$.events[" + std::to_string(i) + "]";
        const auto& row = events[i];
        if (!row.is_object()) throw SchemaError(path, "expected object");
        AtomicEvent ev;
        ev.subject = require(row, path, "subject", "string").get<std::string>();
        ev.action = require(row, path, "action", "string").get<std::string>();
        ev.object = require(row, path, "object", "string").get<std::string>();
        ev.timestamp = require(row, path, "timestamp", "integer").get<std::int64_t>();
        if (ev.timestamp < 0) throw SchemaError(path + ".timestamp", "must be non-negative");
        if (row.contains("techniques")) {
            if (!row["techniques"].is_array()) throw SchemaError(path + ".techniques", "expected array");
            for (std::size_t k = 0; k < row["techniques"].size(); ++k) {
                const auto& t = row["techniques"][k];
                std::string tpath = path + ".techniques[" + std::to_string(k) + "]";
                if (!t.is_string()) throw SchemaError(tpath, "expected string");
                std::string id = t.get<std::string>();
                if (!is_valid_technique_id(id)) {
                    throw SchemaError(tpath, "\"" + id + "\" does not match the technique id pattern");
                }
                ev.techniques.push_back(std::move(id));
            }
        }
        ev.provenance = parse_provenance(row, path);
        g.events.push_back(std::move(ev));
    }

    if (doc.contains("supplementary")) {
        const auto& supplementary = require(doc, "$", "supplementary", "array");
        for (std::size_t i = 0; i < supplementary.size(); ++i) {
            std::string path = "$.supplementary[" + std::to_string(i) + "]";
            const auto& row = supplementary[i];
            if (!row.is_object()) throw SchemaError(path, "expected object");
            SupplementaryRelation r;
            r.subject = require(row, path, "subject", "string").get<std::string>();
            r.relation = require(row, path, "relation", "string").get<std::string>();
            r.object = require(row, path, "object", "string").get<std::string>();
            g.supplementary.push_back(std::move(r));
        }
    }

    if (doc.contains("metadata")) {
        if (!doc["metadata"].is_object()) throw SchemaError("$.metadata", "expected object");
        for (const auto& [key, value] : doc["metadata"].items()) {
            if (!value.is_string()) throw SchemaError("$.metadata." + key, "expected string");
            g.metadata[key] = value.get<std::string>();
        }
    }
    return canonicalize(g);
}

AttackGraph graph_from_json(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

AttackGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open graph file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return graph_from_json(bytes);
}

}  // namespace ctig
