#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ctig {

std::string trim(std::string_view s);
std::string fold_case(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Entity identity: case-folded, whitespace-collapsed display name.
std::string normalize_name(std::string_view s);

// Catalog/token identity: additionally strips punctuation.
std::string normalize_lookup(std::string_view s);

// Question identity: case-fold, collapse whitespace, strip terminal punctuation.
std::string normalize_question(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Paragraphs are delimited by one or more blank lines.
std::vector<std::string> split_paragraphs(std::string_view s);

std::set<std::string> token_set(std::string_view s);

// Token-set Jaccard over normalized tokens. Both empty -> 1.0.
double token_jaccard(std::string_view a, std::string_view b);

bool contains_ci(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace ctig
