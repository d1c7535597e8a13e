#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctig {

struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// MITRE ATT&CK technique entry. Sub-technique ids look like T1204.002.
struct Technique {
    std::string id;
    std::string name;
    std::string tactic;

    bool operator==(const Technique&) const = default;
};

bool is_valid_technique_id(std::string_view id);

// Splits "T1055 - Process Injection" into id and name. Throws CatalogError
// when the separator is missing or the id does not match the pattern.
std::pair<std::string, std::string> parse_technique_string(std::string_view s);

class TechniqueCatalog {
public:
    // Catalog file: JSON array of {id, name, tactic}.
    static TechniqueCatalog load(const std::filesystem::path& path);
    static TechniqueCatalog from_techniques(std::vector<Technique> techniques);

    // Exact id match first, then normalized-name match, then best fuzzy
    // name match at or above the threshold.
    std::optional<Technique> lookup(std::string_view query,
                                    double fuzzy_threshold = 0.8) const;

    bool contains_id(std::string_view id) const;
    std::size_t size() const { return by_id_.size(); }
    std::vector<Technique> techniques() const;

private:
    std::map<std::string, Technique> by_id_;
    std::map<std::string, std::string> id_by_normalized_name_;
};

}  // namespace ctig
