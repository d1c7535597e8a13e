#include "ctig/text_util.hpp"

#include <algorithm>
#include <cctype>

namespace ctig {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), to_lower);
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string normalize_name(std::string_view s) {
    return collapse_whitespace(fold_case(s));
}

std::string normalize_lookup(std::string_view s) {
    std::string folded = fold_case(s);
    std::string stripped;
    stripped.reserve(folded.size());
    for (char c : folded) {
        if (std::isalnum(static_cast<unsigned char>(c)) || is_space(c)) {
            stripped.push_back(c);
        } else {
            stripped.push_back(' ');
        }
    }
    return collapse_whitespace(stripped);
}

std::string normalize_question(std::string_view s) {
    std::string out = collapse_whitespace(fold_case(s));
    while (!out.empty()) {
        char last = out.back();
        if (last == '?' || last == '.' || last == '!' || last == ' ') {
            out.pop_back();
        } else {
            break;
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(s.substr(start));
            break;
        }
        std::string_view line = s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_paragraphs(std::string_view s) {
    std::vector<std::string> paragraphs;
    std::string current;
    for (const std::string& line : split_lines(s)) {
        if (trim(line).empty()) {
            if (!current.empty()) {
                paragraphs.push_back(trim(current));
                current.clear();
            }
        } else {
            if (!current.empty()) current.push_back('\n');
            current += line;
        }
    }
    if (!current.empty()) paragraphs.push_back(trim(current));
    return paragraphs;
}

std::set<std::string> token_set(std::string_view s) {
    std::set<std::string> tokens;
    std::string normalized = normalize_lookup(s);
    std::size_t start = 0;
    while (start < normalized.size()) {
        std::size_t sp = normalized.find(' ', start);
        if (sp == std::string::npos) sp = normalized.size();
        if (sp > start) tokens.insert(normalized.substr(start, sp - start));
        start = sp + 1;
    }
    return tokens;
}

double token_jaccard(std::string_view a, std::string_view b) {
    std::set<std::string> ta = token_set(a);
    std::set<std::string> tb = token_set(b);
    if (ta.empty() && tb.empty()) return 1.0;
    std::size_t intersection = 0;
    for (const std::string& t : ta) {
        if (tb.count(t) != 0) ++intersection;
    }
    std::size_t uni = ta.size() + tb.size() - intersection;
    if (uni == 0) return 1.0;
    return static_cast<double>(intersection) / static_cast<double>(uni);
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    std::string h = fold_case(haystack);
    std::string n = fold_case(needle);
    return h.find(n) != std::string::npos;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    return fold_case(s.substr(0, prefix.size())) == fold_case(prefix);
}

}  // namespace ctig
