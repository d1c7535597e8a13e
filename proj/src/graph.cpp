#include "ctig/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "ctig/text_util.hpp"

namespace ctig {

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::text: return "text";
        case Provenance::image: return "image";
        case Provenance::merged: return "merged";
    }
    return "text";
}

std::optional<Provenance> provenance_from_name(std::string_view s) {
    if (s == "text") return Provenance::text;
    if (s == "image") return Provenance::image;
    if (s == "merged") return Provenance::merged;
    return std::nullopt;
}

const Entity* AttackGraph::find_entity(std::string_view id) const {
    for (const Entity& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

const Entity* AttackGraph::resolve(std::string_view id_or_name) const {
    if (const Entity* byid = find_entity(id_or_name)) return byid;
    std::string wanted = normalize_name(id_or_name);
    for (const Entity& e : entities) {
        if (normalize_name(e.name) == wanted) return &e;
    }
    return nullptr;
}

std::int64_t AttackGraph::max_timestamp() const {
    std::int64_t max_ts = 0;
    for (const AtomicEvent& ev : events) max_ts = std::max(max_ts, ev.timestamp);
    return max_ts;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_graph(const AttackGraph& g) {
    std::vector<Violation> violations;
    auto add = [&](std::string rule, std::string element, std::string message) {
        violations.push_back({std::move(rule), std::move(element), std::move(message)});
    };

    std::set<std::string> ids;
    for (const Entity& e : g.entities) {
        if (e.id.empty()) add("entity-id", e.name, "entity id is empty");
        if (!ids.insert(e.id).second) add("entity-id-unique", e.id, "duplicate entity id");
        if (e.name.empty()) add("entity-name", e.id, "entity name is empty");
        if (e.entity_type.empty()) add("entity-type", e.id, "entity type is empty");
    }

    std::set<std::tuple<std::string, std::string, std::string, std::int64_t>> seen_events;
    for (std::size_t i = 0; i < g.events.size(); ++i) {
        const AtomicEvent& ev = g.events[i];
        std::string element = "events[" + std::to_string(i) + "]";
        if (ids.count(ev.subject) == 0) {
            add("referential-integrity", element, "event subject \"" + ev.subject + "\" does not resolve");
        }
        if (ids.count(ev.object) == 0) {
            add("referential-integrity", element, "event object \"" + ev.object + "\" does not resolve");
        }
        if (ev.action.empty()) add("event-action", element, "event action is empty");
        if (ev.timestamp < 0) add("event-timestamp", element, "timestamp is negative");
        for (const std::string& t : ev.techniques) {
            if (!is_valid_technique_id(t)) {
                add("technique-id", element, "technique \"" + t + "\" does not match the id pattern");
            }
        }
        if (!seen_events.insert({ev.subject, ev.action, ev.object, ev.timestamp}).second) {
            add("event-unique", element,
                "duplicate event (" + ev.subject + ", " + ev.action + ", " + ev.object + ", t=" +
                    std::to_string(ev.timestamp) + ")");
        }
    }

    for (std::size_t i = 0; i < g.supplementary.size(); ++i) {
        const SupplementaryRelation& r = g.supplementary[i];
        std::string element = "supplementary[" + std::to_string(i) + "]";
        if (ids.count(r.subject) == 0) {
            add("referential-integrity", element, "relation subject \"" + r.subject + "\" does not resolve");
        }
        if (ids.count(r.object) == 0) {
            add("referential-integrity", element, "relation object \"" + r.object + "\" does not resolve");
        }
        if (r.relation.empty()) add("relation-label", element, "relation label is empty");
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Delta JSON

std::string_view delta_kind_name(DeltaKind k) {
    switch (k) {
        case DeltaKind::node_extension: return "node_extension";
        case DeltaKind::relation_update: return "relation_update";
        case DeltaKind::technique_addition: return "technique_addition";
    }
    return "node_extension";
}

std::string_view delta_kind_wire_name(DeltaKind k) {
    switch (k) {
        case DeltaKind::node_extension: return "new_node_addition";
        case DeltaKind::relation_update: return "new_relationship_addition";
        case DeltaKind::technique_addition: return "technique_addition";
    }
    return "new_node_addition";
}

namespace {

std::optional<DeltaKind> delta_kind_from_wire(std::string_view s) {
    std::string key = normalize_lookup(s);
    if (key == "new node addition" || key == "node extension") return DeltaKind::node_extension;
    if (key == "new relationship addition" || key == "relation update" || key == "relationship update") {
        return DeltaKind::relation_update;
    }
    if (key == "technique addition") return DeltaKind::technique_addition;
    return std::nullopt;
}

nlohmann::json relationship_to_json(const DeltaRelationship& r) {
    nlohmann::json j = {
        {"subject", r.subject},         {"subject_type", r.subject_type},
        {"relation", r.relation},       {"object", r.object},
        {"object_type", r.object_type},
    };
    if (r.supplementary) j["supplementary"] = true;
    return j;
}

std::string require_string(const nlohmann::json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw DeltaParseError(std::string(ctx) + ": missing or empty \"" + key + "\"");
    }
    return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it != j.end() && it->is_string()) return it->get<std::string>();
    return {};
}

DeltaRelationship relationship_from_json(const nlohmann::json& j, const char* ctx) {
    if (!j.is_object()) throw DeltaParseError(std::string(ctx) + ": relationship must be an object");
    DeltaRelationship r;
    // Table-style payloads may capitalize the keys.
    auto pick = [&](const char* a, const char* b) -> std::string {
        if (j.contains(a) && j[a].is_string()) return j[a].get<std::string>();
        if (j.contains(b) && j[b].is_string()) return j[b].get<std::string>();
        return {};
    };
    r.subject = pick("subject", "Subject");
    r.subject_type = pick("subject_type", "SubjectType");
    r.relation = pick("relation", "Relation");
    r.object = pick("object", "Object");
    r.object_type = pick("object_type", "ObjectType");
    if (j.contains("supplementary") && j["supplementary"].is_boolean()) {
        r.supplementary = j["supplementary"].get<bool>();
    }
    if (r.subject.empty() || r.relation.empty() || r.object.empty()) {
        throw DeltaParseError(std::string(ctx) + ": relationship needs subject, relation, and object");
    }
    return r;
}

}  // namespace

nlohmann::json GraphDelta::to_json() const {
    nlohmann::json j;
    j["type"] = std::string(delta_kind_wire_name(kind));
    j["description"] = description;
    if (kind == DeltaKind::node_extension) {
        const auto& p = std::get<NodeExtensionPayload>(payload);
        j["new_node"] = {{"id", p.node_id},
                         {"type", p.node_type},
                         {"properties", {{"description", p.node_description}}}};
        j["relationship"] = relationship_to_json(p.relationship);
    } else if (kind == DeltaKind::relation_update) {
        const auto& p = std::get<RelationUpdatePayload>(payload);
        j["relationship"] = relationship_to_json(p.relationship);
        j["replace_existing"] = p.replace_existing;
    } else {
        const auto& p = std::get<TechniqueAdditionPayload>(payload);
        j["target_relationship"] = {{"subject", p.target.subject},
                                    {"relation", p.target.relation},
                                    {"object", p.target.object}};
        j["new_techniques"] = p.new_techniques;
    }
    if (!source.image_id.empty() || !source.question_id.empty()) {
        j["source"] = {{"image_id", source.image_id}, {"question_id", source.question_id}};
    }
    return j;
}

GraphDelta GraphDelta::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DeltaParseError("delta must be a JSON object");
    std::string type = require_string(j, "type", "delta");
    auto kind = delta_kind_from_wire(type);
    if (!kind) throw DeltaParseError("unknown delta type \"" + type + "\"");

    GraphDelta d;
    d.kind = *kind;
    d.description = optional_string(j, "description");
    if (d.description.empty()) throw DeltaParseError("delta description must be non-empty");

    if (d.kind == DeltaKind::node_extension) {
        if (!j.contains("new_node") || !j["new_node"].is_object()) {
            throw DeltaParseError("node extension needs a \"new_node\" object");
        }
        const auto& n = j["new_node"];
        NodeExtensionPayload p;
        p.node_id = require_string(n, "id", "new_node");
        p.node_type = require_string(n, "type", "new_node");
        if (n.contains("properties") && n["properties"].is_object()) {
            p.node_description = optional_string(n["properties"], "description");
        }
        if (p.node_description.empty()) p.node_description = optional_string(n, "description");
        if (!j.contains("relationship")) {
            throw DeltaParseError("node extension needs a \"relationship\" object");
        }
        p.relationship = relationship_from_json(j["relationship"], "node extension");
        d.payload = std::move(p);
    } else if (d.kind == DeltaKind::relation_update) {
        if (!j.contains("relationship")) {
            throw DeltaParseError("relation update needs a \"relationship\" object");
        }
        RelationUpdatePayload p;
        p.relationship = relationship_from_json(j["relationship"], "relation update");
        if (j.contains("replace_existing") && j["replace_existing"].is_boolean()) {
            p.replace_existing = j["replace_existing"].get<bool>();
        }
        d.payload = std::move(p);
    } else {
        if (!j.contains("target_relationship") || !j["target_relationship"].is_object()) {
            throw DeltaParseError("technique addition needs a \"target_relationship\" object");
        }
        const auto& t = j["target_relationship"];
        TechniqueAdditionPayload p;
        auto pick = [&](const char* a, const char* b) -> std::string {
            if (t.contains(a) && t[a].is_string()) return t[a].get<std::string>();
            if (t.contains(b) && t[b].is_string()) return t[b].get<std::string>();
            return {};
        };
        p.target.subject = pick("subject", "Subject");
        p.target.relation = pick("relation", "Relation");
        p.target.object = pick("object", "Object");
        if (p.target.subject.empty() || p.target.relation.empty() || p.target.object.empty()) {
            throw DeltaParseError("target_relationship needs subject, relation, and object");
        }
        if (!j.contains("new_techniques") || !j["new_techniques"].is_array() || j["new_techniques"].empty()) {
            throw DeltaParseError("technique addition needs a non-empty \"new_techniques\" array");
        }
        for (const auto& s : j["new_techniques"]) {
            if (!s.is_string()) throw DeltaParseError("new_techniques entries must be strings");
            std::string entry = s.get<std::string>();
            parse_technique_string(entry);  // throws on malformed entries
            p.new_techniques.push_back(std::move(entry));
        }
        d.payload = std::move(p);
    }

    if (j.contains("source") && j["source"].is_object()) {
        d.source.image_id = optional_string(j["source"], "image_id");
        d.source.question_id = optional_string(j["source"], "question_id");
    }
    return d;
}

std::string GraphDelta::identity() const {
    nlohmann::json j = to_json();
    j.erase("description");
    j.erase("source");
    return j.dump();
}

// ---------------------------------------------------------------------------
// Delta application

namespace {

bool action_matches(const std::string& a, const std::string& b) {
    return normalize_name(a) == normalize_name(b);
}

// Existing event with the same endpoints and action, any timestamp.
const AtomicEvent* find_event(const AttackGraph& g, const std::string& subject_id,
                              const std::string& action, const std::string& object_id) {
    for (const AtomicEvent& ev : g.events) {
        if (ev.subject == subject_id && ev.object == object_id && action_matches(ev.action, action)) {
            return &ev;
        }
    }
    return nullptr;
}

bool has_supplementary(const AttackGraph& g, const std::string& subject_id,
                       const std::string& relation, const std::string& object_id) {
    for (const SupplementaryRelation& r : g.supplementary) {
        if (r.subject == subject_id && r.object == object_id && action_matches(r.relation, relation)) {
            return true;
        }
    }
    return false;
}

ApplyOutcome rejected(const AttackGraph& g, std::string reason) {
    return {ApplyStatus::rejected, std::move(reason), g};
}

ApplyOutcome noop(const AttackGraph& g) { return {ApplyStatus::noop, "", g}; }

void add_link(AttackGraph& g, const std::string& subject_id, const std::string& relation,
              const std::string& object_id, bool supplementary) {
    if (supplementary) {
        g.supplementary.push_back({subject_id, relation, object_id});
    } else {
        AtomicEvent ev;
        ev.subject = subject_id;
        ev.action = relation;
        ev.object = object_id;
        ev.timestamp = g.max_timestamp() + 1;
        ev.provenance = Provenance::image;
        g.events.push_back(std::move(ev));
    }
}

ApplyOutcome apply_node_extension(const AttackGraph& g, const GraphDelta& d) {
    const auto& p = std::get<NodeExtensionPayload>(d.payload);
    const DeltaRelationship& rel = p.relationship;

    std::string node_key = normalize_name(p.node_id);
    bool subject_is_new = normalize_name(rel.subject) == node_key;
    bool object_is_new = normalize_name(rel.object) == node_key;
    if (!subject_is_new && !object_is_new) {
        return rejected(g, "node-extension-link: relationship does not reference the new node");
    }

    const Entity* anchor = g.resolve(subject_is_new ? rel.object : rel.subject);
    if (anchor == nullptr) {
        return rejected(g, "target-not-found: \"" + (subject_is_new ? rel.object : rel.subject) +
                               "\" does not resolve in the graph");
    }

    const Entity* existing = g.find_entity(p.node_id);
    if (existing == nullptr) {
        for (const Entity& e : g.entities) {
            if (normalize_name(e.name) == node_key && e.entity_type == p.node_type) {
                existing = &e;
                break;
            }
        }
    }

    if (existing != nullptr) {
        if (existing->entity_type != p.node_type || normalize_name(existing->name) != node_key) {
            return rejected(g, "duplicate-node-id: entity \"" + p.node_id + "\" already exists");
        }
        std::string subject_id = subject_is_new ? existing->id : anchor->id;
        std::string object_id = subject_is_new ? anchor->id : existing->id;
        bool linked = rel.supplementary
                          ? has_supplementary(g, subject_id, rel.relation, object_id)
                          : find_event(g, subject_id, rel.relation, object_id) != nullptr;
        if (linked) return noop(g);
        AttackGraph out = g;
        add_link(out, subject_id, rel.relation, object_id, rel.supplementary);
        return {ApplyStatus::applied, "", std::move(out)};
    }

    AttackGraph out = g;
    Entity node;
    node.id = p.node_id;
    node.name = p.node_id;
    node.entity_type = p.node_type;
    node.description = p.node_description;
    node.provenance = Provenance::image;
    out.entities.push_back(node);

    std::string subject_id = subject_is_new ? node.id : anchor->id;
    std::string object_id = subject_is_new ? anchor->id : node.id;
    add_link(out, subject_id, rel.relation, object_id, rel.supplementary);
    return {ApplyStatus::applied, "", std::move(out)};
}

ApplyOutcome apply_relation_update(const AttackGraph& g, const GraphDelta& d) {
    const auto& p = std::get<RelationUpdatePayload>(d.payload);
    const DeltaRelationship& rel = p.relationship;

    const Entity* subject = g.resolve(rel.subject);
    const Entity* object = g.resolve(rel.object);
    if (subject == nullptr || object == nullptr) {
        return rejected(g, "target-not-found: endpoint \"" +
                               (subject == nullptr ? rel.subject : rel.object) +
                               "\" does not resolve in the graph");
    }

    if (p.replace_existing) {
        // Match key is (subject, object); of several matches take the most
        // recent timestamp.
        const AtomicEvent* target = nullptr;
        for (const AtomicEvent& ev : g.events) {
            if (ev.subject == subject->id && ev.object == object->id) {
                if (target == nullptr || ev.timestamp > target->timestamp) target = &ev;
            }
        }
        if (target == nullptr) {
            return rejected(g, "target-not-found: no event between \"" + rel.subject +
                                   "\" and \"" + rel.object + "\" to replace");
        }
        if (action_matches(target->action, rel.relation)) return noop(g);

        AttackGraph out = g;
        std::size_t index = static_cast<std::size_t>(target - g.events.data());
        AtomicEvent& ev = out.events[index];
        out.metadata["replaced_action:" + ev.subject + ":" + ev.object + ":" +
                     std::to_string(ev.timestamp)] = ev.action;
        ev.action = rel.relation;
        ev.provenance = Provenance::merged;
        // Attached techniques stay with the relabeled event.
        return {ApplyStatus::applied, "", std::move(out)};
    }

    if (rel.supplementary) {
        if (has_supplementary(g, subject->id, rel.relation, object->id)) return noop(g);
        AttackGraph out = g;
        add_link(out, subject->id, rel.relation, object->id, /*supplementary=*/true);
        return {ApplyStatus::applied, "", std::move(out)};
    }
    if (find_event(g, subject->id, rel.relation, object->id) != nullptr) return noop(g);
    AttackGraph out = g;
    add_link(out, subject->id, rel.relation, object->id, /*supplementary=*/false);
    return {ApplyStatus::applied, "", std::move(out)};
}

ApplyOutcome apply_technique_addition(const AttackGraph& g, const GraphDelta& d,
                                      const TechniqueCatalog& catalog) {
    const auto& p = std::get<TechniqueAdditionPayload>(d.payload);

    std::vector<std::string> ids;
    for (const std::string& entry : p.new_techniques) {
        std::string id;
        try {
            id = parse_technique_string(entry).first;
        } catch (const CatalogError& e) {
            return rejected(g, std::string("malformed-technique: ") + e.what());
        }
        if (!catalog.contains_id(id)) {
            return rejected(g, "unknown-technique-id: " + id + " is not in the catalog");
        }
        ids.push_back(std::move(id));
    }

    const Entity* subject = g.resolve(p.target.subject);
    const Entity* object = g.resolve(p.target.object);
    const AtomicEvent* target = nullptr;
    if (subject != nullptr && object != nullptr) {
        target = find_event(g, subject->id, p.target.relation, object->id);
    }
    if (target == nullptr) {
        return rejected(g, "target-not-found: no event matching (" + p.target.subject + ", " +
                               p.target.relation + ", " + p.target.object + ")");
    }

    std::vector<std::string> missing;
    for (const std::string& id : ids) {
        if (std::find(target->techniques.begin(), target->techniques.end(), id) ==
                target->techniques.end() &&
            std::find(missing.begin(), missing.end(), id) == missing.end()) {
            missing.push_back(id);
        }
    }
    if (missing.empty()) return noop(g);

    AttackGraph out = g;
    std::size_t index = static_cast<std::size_t>(target - g.events.data());
    for (std::string& id : missing) out.events[index].techniques.push_back(std::move(id));
    return {ApplyStatus::applied, "", std::move(out)};
}

}  // namespace

ApplyOutcome apply_delta(const AttackGraph& g, const GraphDelta& d, const TechniqueCatalog& catalog) {
    switch (d.kind) {
        case DeltaKind::node_extension: return apply_node_extension(g, d);
        case DeltaKind::relation_update: return apply_relation_update(g, d);
        case DeltaKind::technique_addition: return apply_technique_addition(g, d, catalog);
    }
    return rejected(g, "unknown delta kind");
}

// ---------------------------------------------------------------------------
// Diff

namespace {

std::string entity_display_name(const AttackGraph& g, const std::string& id) {
    const Entity* e = g.find_entity(id);
    return e != nullptr ? e->name : id;
}

struct RelationTuples {
    std::set<std::string> keys;
    std::map<std::string, std::string> display;  // key -> formatted listing
};

RelationTuples relation_tuples(const AttackGraph& g) {
    RelationTuples out;
    auto record = [&](const std::string& s_id, const std::string& label, const std::string& o_id) {
        std::string s = entity_display_name(g, s_id);
        std::string o = entity_display_name(g, o_id);
        std::string key = normalize_name(s) + "|" + normalize_name(label) + "|" + normalize_name(o);
        out.keys.insert(key);
        out.display.emplace(key, s + " --" + label + "--> " + o);
    };
    for (const AtomicEvent& ev : g.events) record(ev.subject, ev.action, ev.object);
    for (const SupplementaryRelation& r : g.supplementary) record(r.subject, r.relation, r.object);
    return out;
}

}  // namespace

GainReport diff_graphs(const AttackGraph& text_g, const AttackGraph& mm_g) {
    if (text_g.report_id != mm_g.report_id) {
        throw GraphError("diff_graphs: report ids differ (\"" + text_g.report_id + "\" vs \"" +
                         mm_g.report_id + "\")");
    }
    GainReport report;

    std::set<std::string> text_names;
    for (const Entity& e : text_g.entities) text_names.insert(normalize_name(e.name));
    std::map<std::string, std::string> added_names;  // normalized -> display
    for (const Entity& e : mm_g.entities) {
        std::string key = normalize_name(e.name);
        if (text_names.count(key) == 0) added_names.emplace(key, e.name);
    }
    for (const auto& [key, display] : added_names) report.added_entities.push_back(display);

    RelationTuples text_rel = relation_tuples(text_g);
    RelationTuples mm_rel = relation_tuples(mm_g);
    for (const std::string& key : mm_rel.keys) {
        if (text_rel.keys.count(key) == 0) report.added_relations.push_back(mm_rel.display.at(key));
    }
    std::sort(report.added_relations.begin(), report.added_relations.end());

    std::set<std::string> text_techniques;
    for (const AtomicEvent& ev : text_g.events) {
        text_techniques.insert(ev.techniques.begin(), ev.techniques.end());
    }
    std::set<std::string> mm_techniques;
    for (const AtomicEvent& ev : mm_g.events) {
        mm_techniques.insert(ev.techniques.begin(), ev.techniques.end());
    }
    for (const std::string& id : mm_techniques) {
        if (text_techniques.count(id) == 0) report.added_techniques.push_back(id);
    }
    return report;
}

nlohmann::json GainReport::to_json() const {
    return {
        {"added_entities", {{"count", added_entities.size()}, {"items", added_entities}}},
        {"added_relations", {{"count", added_relations.size()}, {"items", added_relations}}},
        {"added_techniques", {{"count", added_techniques.size()}, {"items", added_techniques}}},
    };
}

}  // namespace ctig
