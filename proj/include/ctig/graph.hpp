#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ctig/catalog.hpp"
#include "json.hpp"

namespace ctig {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Provenance { text, image, merged };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view s);

struct Entity {
    std::string id;
    std::string name;
    std::string entity_type;
    std::string description;
    Provenance provenance = Provenance::text;

    bool operator==(const Entity&) const = default;
};

// One quintuple (subject, action, object, timestamp, techniques).
// subject/object hold entity ids.
struct AtomicEvent {
    std::string subject;
    std::string action;
    std::string object;
    std::int64_t timestamp = 0;
    std::vector<std::string> techniques;
    Provenance provenance = Provenance::text;

    bool operator==(const AtomicEvent&) const = default;
};

// Non-verbal link hung between entities; never timed, never carries techniques.
struct SupplementaryRelation {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const SupplementaryRelation&) const = default;
};

struct AttackGraph {
    std::string report_id;
    std::vector<Entity> entities;
    std::vector<AtomicEvent> events;
    std::vector<SupplementaryRelation> supplementary;
    std::map<std::string, std::string> metadata;

    const Entity* find_entity(std::string_view id) const;
    // Matches on the case-folded, whitespace-collapsed display name;
    // falls back to id equality.
    const Entity* resolve(std::string_view id_or_name) const;
    std::int64_t max_timestamp() const;

    bool operator==(const AttackGraph&) const = default;
};

struct Violation {
    std::string rule;
    std::string element;
    std::string message;
};

std::vector<Violation> validate_graph(const AttackGraph& g);

// ---------------------------------------------------------------------------
// Deltas

enum class DeltaKind { node_extension, relation_update, technique_addition };

std::string_view delta_kind_name(DeltaKind k);        // internal names
std::string_view delta_kind_wire_name(DeltaKind k);   // wire "type" values

struct DeltaRelationship {
    std::string subject;
    std::string subject_type;
    std::string relation;
    std::string object;
    std::string object_type;
    // Non-verbal links become supplementary relations instead of events.
    bool supplementary = false;

    bool operator==(const DeltaRelationship&) const = default;
};

struct NodeExtensionPayload {
    std::string node_id;
    std::string node_type;
    std::string node_description;
    DeltaRelationship relationship;

    bool operator==(const NodeExtensionPayload&) const = default;
};

struct RelationUpdatePayload {
    DeltaRelationship relationship;
    bool replace_existing = false;

    bool operator==(const RelationUpdatePayload&) const = default;
};

struct TargetRelationship {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const TargetRelationship&) const = default;
};

struct TechniqueAdditionPayload {
    TargetRelationship target;
    std::vector<std::string> new_techniques;  // "Tid - Name" strings

    bool operator==(const TechniqueAdditionPayload&) const = default;
};

struct DeltaSource {
    std::string image_id;
    std::string question_id;

    bool operator==(const DeltaSource&) const = default;
};

struct DeltaParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphDelta {
    DeltaKind kind = DeltaKind::node_extension;
    std::string description;
    std::variant<NodeExtensionPayload, RelationUpdatePayload, TechniqueAdditionPayload> payload;
    DeltaSource source;

    // Duplicate suppression key: kind plus canonical payload, ignoring
    // description and source.
    std::string identity() const;

    nlohmann::json to_json() const;
    static GraphDelta from_json(const nlohmann::json& j);

    bool operator==(const GraphDelta&) const = default;
};

enum class ApplyStatus { applied, noop, rejected };

struct ApplyOutcome {
    ApplyStatus status = ApplyStatus::rejected;
    std::string reason;  // rejection reason, empty on success
    AttackGraph graph;   // updated graph (input graph when not applied)
};

ApplyOutcome apply_delta(const AttackGraph& g, const GraphDelta& d,
                         const TechniqueCatalog& catalog);

// ---------------------------------------------------------------------------
// Diff

struct GainReport {
    std::vector<std::string> added_entities;
    std::vector<std::string> added_relations;
    std::vector<std::string> added_techniques;

    std::size_t entity_count() const { return added_entities.size(); }
    std::size_t relation_count() const { return added_relations.size(); }
    std::size_t technique_count() const { return added_techniques.size(); }

    nlohmann::json to_json() const;
};

// Set differences by normalized entity name, normalized
// (subject, action/relation, object) tuple, and technique id.
GainReport diff_graphs(const AttackGraph& text_g, const AttackGraph& mm_g);

// ---------------------------------------------------------------------------
// Serialization & export

struct SchemaError : std::runtime_error {
    SchemaError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), field_path(path) {}
    std::string field_path;
};

// Sorted collections, sorted keys, trailing newline; byte-stable round trip.
AttackGraph canonicalize(const AttackGraph& g);
std::string to_canonical_json(const AttackGraph& g);
AttackGraph graph_from_json(const std::string& bytes);
AttackGraph graph_from_json(const nlohmann::json& doc);
AttackGraph load_graph(const std::filesystem::path& path);

std::string export_dot(const AttackGraph& g);
std::string export_html(const AttackGraph& g);

// One "subject --action--> object [T....]" line per event plus supplementary
// links; feeds prompts and reports.
std::string graph_triplet_listing(const AttackGraph& g);

}  // namespace ctig
