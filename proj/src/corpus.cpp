#include "ctig/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctig/prompts.hpp"
#include "ctig/text_util.hpp"
#include "json.hpp"

namespace ctig {

std::string_view image_type_name(ImageType t) {
    switch (t) {
        case ImageType::attack_flow: return "attack-flow/intelligence-structure";
        case ImageType::malware_code: return "malware-code";
        case ImageType::tool_screenshot: return "application-tool-screenshot";
        case ImageType::data_table: return "data-table";
        case ImageType::chart: return "chart/data-visualization";
        case ImageType::file_paths: return "file-paths/names";
        case ImageType::descriptive: return "descriptive/content-explanation";
    }
    return "descriptive/content-explanation";
}

std::string_view image_type_display(ImageType t) {
    switch (t) {
        case ImageType::attack_flow: return "Attack Flow or Intelligence Structure";
        case ImageType::malware_code: return "Malware Code";
        case ImageType::tool_screenshot: return "Application Tool Screenshot";
        case ImageType::data_table: return "Data Table";
        case ImageType::chart: return "Charts and Data Visualization";
        case ImageType::file_paths: return "File Paths and Names";
        case ImageType::descriptive: return "Descriptive Image and Content Explanation";
    }
    return "Descriptive Image and Content Explanation";
}

std::optional<ImageType> image_type_from_name(std::string_view s) {
    for (ImageType t : kAllImageTypes) {
        if (s == image_type_name(t)) return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bundle loading

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// `![image-id]` markers, each on its own line.
std::vector<std::pair<std::string, std::size_t>> find_anchors(std::string_view text) {
    std::vector<std::pair<std::string, std::size_t>> anchors;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string line = trim(text.substr(line_start, line_end - line_start));
        if (line.size() > 3 && line.substr(0, 2) == "![" && line.back() == ']') {
            anchors.emplace_back(line.substr(2, line.size() - 3),
                                 line_start + text.substr(line_start, line_end - line_start)
                                                  .find('!'));
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return anchors;
}

}  // namespace

ReportBundle load_bundle(const std::filesystem::path& path) {
    std::filesystem::path manifest_path = path / "report.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw CorpusError("missing manifest: " + manifest_path.string());
    }
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw CorpusError("invalid manifest JSON: " + std::string(e.what()));
    }
    if (!manifest.is_object() || !manifest.contains("report_id") || !manifest.contains("text")) {
        throw CorpusError("manifest needs report_id and text fields");
    }

    ReportBundle bundle;
    bundle.root = path;
    bundle.report_id = manifest["report_id"].get<std::string>();
    bundle.text = read_file(path / manifest["text"].get<std::string>());

    auto anchors = find_anchors(bundle.text);

    if (manifest.contains("images")) {
        for (const auto& row : manifest["images"]) {
            ThreatImage image;
            image.id = row.value("id", "");
            if (image.id.empty()) throw CorpusError("image entry without id in manifest");
            for (const ThreatImage& existing : bundle.images) {
                if (existing.id == image.id) {
                    throw CorpusError("duplicate image id in manifest: " + image.id);
                }
            }
            image.file = path / row.value("file", "");
            if (!std::filesystem::exists(image.file)) {
                throw CorpusError("image file missing: " + image.file.string());
            }
            image.bytes = read_file(image.file);
            auto media = sniff_media_type(image.bytes);
            if (!media) {
                throw CorpusError("undecodable image (unknown magic bytes): " +
                                  image.file.string());
            }
            image.media_type = *media;

            std::size_t hits = 0;
            for (const auto& [anchor_id, offset] : anchors) {
                if (anchor_id == image.id) {
                    image.anchor_offset = offset;
                    ++hits;
                }
            }
            if (hits != 1) {
                throw CorpusError("unresolved anchor: image \"" + image.id + "\" has " +
                                  std::to_string(hits) + " anchors in the text, expected 1");
            }
            bundle.images.push_back(std::move(image));
        }
    }

    for (const auto& [anchor_id, offset] : anchors) {
        bool known = std::any_of(bundle.images.begin(), bundle.images.end(),
                                 [&](const ThreatImage& i) { return i.id == anchor_id; });
        if (!known) {
            throw CorpusError("unresolved anchor: ![" + anchor_id + "] names no bundled image");
        }
    }

    if (manifest.contains("graph") && manifest["graph"].is_string()) {
        bundle.text_graph = load_graph(path / manifest["graph"].get<std::string>());
    }
    if (manifest.contains("gold") && manifest["gold"].is_string()) {
        std::filesystem::path gold = path / manifest["gold"].get<std::string>();
        if (std::filesystem::exists(gold)) bundle.gold_path = gold;
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Pre-filter

namespace {

bool model_says_yes(Gateway& gateway, const ThreatImage& image, char rule,
                    std::vector<std::string>& warnings) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::prefilter_screen(rule)});
    msg.parts.push_back(image.as_part());
    req.messages.push_back(std::move(msg));
    try {
        std::string reply = fold_case(trim(gateway.complete(req)));
        return reply.rfind("yes", 0) == 0;
    } catch (const GatewayError& e) {
        warnings.push_back("prefilter rule " + std::string(1, rule) + " skipped for " + image.id +
                           ": " + e.what());
        return false;
    }
}

}  // namespace

PrefilterResult prefilter_images(const ReportBundle& bundle, const PrefilterRules& rules,
                                 Gateway* gateway) {
    PrefilterResult result;
    for (const ThreatImage& image : bundle.images) {
        ImageProbe probe = probe_image(image.media_type, image.bytes);
        if (!probe.ok) {
            result.rejected.push_back({image, 'e', "corrupt or truncated image: " + probe.error});
            continue;
        }
        if (probe.width < rules.min_width || probe.height < rules.min_height) {
            result.rejected.push_back(
                {image, 'd',
                 "dimensions " + std::to_string(probe.width) + "x" + std::to_string(probe.height) +
                     " below minimum " + std::to_string(rules.min_width) + "x" +
                     std::to_string(rules.min_height)});
            continue;
        }
        if (rules.model_rules && gateway != nullptr) {
            char hit = 0;
            std::string reason;
            if (model_says_yes(*gateway, image, 'a', result.warnings)) {
                hit = 'a';
                reason = "logo or advertisement content";
            } else if (model_says_yes(*gateway, image, 'b', result.warnings)) {
                hit = 'b';
                reason = "occlusion or strong watermark";
            } else if (model_says_yes(*gateway, image, 'c', result.warnings)) {
                hit = 'c';
                reason = "weakly informative visual sample";
            }
            if (hit != 0) {
                result.rejected.push_back({image, hit, reason});
                continue;
            }
        }
        result.kept.push_back(image);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Contexts

namespace {

struct ParagraphSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string text;
};

std::vector<ParagraphSpan> paragraph_spans(std::string_view text) {
    std::vector<ParagraphSpan> spans;
    std::size_t pos = 0;
    std::optional<std::size_t> start;
    std::size_t last_content_end = 0;
    while (pos <= text.size()) {
        std::size_t line_end = text.find('\n', pos);
        if (line_end == std::string_view::npos) line_end = text.size();
        bool blank = trim(text.substr(pos, line_end - pos)).empty();
        if (!blank) {
            if (!start) start = pos;
            last_content_end = line_end;
        } else if (start) {
            spans.push_back({*start, last_content_end,
                             std::string(text.substr(*start, last_content_end - *start))});
            start.reset();
        }
        if (line_end == text.size()) break;
        pos = line_end + 1;
    }
    if (start) {
        spans.push_back(
            {*start, last_content_end, std::string(text.substr(*start, last_content_end - *start))});
    }
    return spans;
}

// Anchor markers are plumbing; keep them out of model input.
std::string strip_anchor_lines(std::string_view text) {
    std::string out;
    for (const std::string& line : split_lines(text)) {
        std::string t = trim(line);
        if (t.size() > 3 && t.substr(0, 2) == "![" && t.back() == ']') continue;
        out += line;
        out += '\n';
    }
    return trim(out);
}

std::string truncate_to(std::string s, std::size_t budget) {
    if (s.size() > budget) s.resize(budget);
    return s;
}

std::string summarize_via(Gateway& gateway, const std::string& prompt, int max_tokens) {
    ChatRequest req = gateway.new_request();
    req.max_tokens = max_tokens;
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompt});
    req.messages.push_back(std::move(msg));
    return trim(gateway.complete(req));
}

}  // namespace

std::string image_aware_context(const ReportBundle& bundle, const ThreatImage& image,
                                Gateway* gateway, const ContextBudget& budget,
                                std::vector<std::string>* warnings) {
    auto spans = paragraph_spans(bundle.text);
    if (spans.empty()) throw CorpusError("empty-report: no paragraphs in report text");

    std::size_t anchor_index = 0;
    bool found = false;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (image.anchor_offset >= spans[i].begin && image.anchor_offset < spans[i].end) {
            anchor_index = i;
            found = true;
            break;
        }
    }
    if (!found) {
        // Anchor sits between paragraphs; take the nearest following one.
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (spans[i].begin >= image.anchor_offset) {
                anchor_index = i;
                found = true;
                break;
            }
        }
        if (!found) anchor_index = spans.size() - 1;
    }

    std::size_t first = anchor_index > 0 ? anchor_index - 1 : 0;
    std::size_t last = std::min(anchor_index + 1, spans.size() - 1);
    std::string window;
    for (std::size_t i = first; i <= last; ++i) {
        std::string body = strip_anchor_lines(spans[i].text);
        if (body.empty()) continue;
        if (!window.empty()) window += "\n\n";
        window += body;
    }
    if (window.empty()) window = "(no surrounding text)";

    if (gateway != nullptr) {
        try {
            std::string summary = summarize_via(*gateway, prompts::summarize_passage(window),
                                                budget.summary_max_tokens);
            if (!summary.empty()) return truncate_to(summary, budget.context_chars);
        } catch (const GatewayError& e) {
            if (warnings != nullptr) {
                warnings->push_back("image-aware context fell back to the raw window for " +
                                    image.id + ": " + e.what());
            }
        }
    }
    return truncate_to(window, budget.context_chars);
}

std::string global_context(const ReportBundle& bundle, Gateway* gateway,
                           const ContextBudget& budget, std::vector<std::string>* warnings) {
    std::string text = strip_anchor_lines(bundle.text);
    if (trim(text).empty()) throw CorpusError("empty-report: report text is empty");

    if (gateway != nullptr) {
        try {
            if (text.size() <= budget.gateway_input_chars) {
                std::string summary = summarize_via(*gateway, prompts::summarize_report(text),
                                                    budget.summary_max_tokens);
                if (!summary.empty()) return truncate_to(summary, budget.context_chars);
            } else {
                std::vector<std::string> chunk_summaries;
                std::string chunk;
                auto flush = [&]() {
                    if (chunk.empty()) return;
                    chunk_summaries.push_back(summarize_via(
                        *gateway, prompts::summarize_passage(chunk), budget.summary_max_tokens));
                    chunk.clear();
                };
                for (const std::string& paragraph : split_paragraphs(text)) {
                    if (!chunk.empty() &&
                        chunk.size() + paragraph.size() + 2 > budget.gateway_input_chars) {
                        flush();
                    }
                    if (!chunk.empty()) chunk += "\n\n";
                    chunk += paragraph;
                }
                flush();
                std::string combined = summarize_via(
                    *gateway, prompts::combine_summaries(chunk_summaries),
                    budget.summary_max_tokens);
                if (!combined.empty()) return truncate_to(combined, budget.context_chars);
            }
        } catch (const GatewayError& e) {
            if (warnings != nullptr) {
                warnings->push_back("global context fell back to raw text: " +
                                    std::string(e.what()));
            }
        }
    }
    return truncate_to(text, budget.context_chars);
}

ImageType classify_image_type(const ThreatImage& image, const ContextPair& contexts,
                              Gateway& gateway, std::vector<std::string>* warnings) {
    ChatRequest req = gateway.new_request();
    ChatMessage msg;
    msg.role = Role::user;
    msg.parts.push_back(TextPart{prompts::classify_image(contexts)});
    msg.parts.push_back(image.as_part());
    req.messages.push_back(std::move(msg));

    std::string reply;
    try {
        reply = normalize_lookup(gateway.complete(req));
    } catch (const GatewayError& e) {
        if (warnings != nullptr) {
            warnings->push_back("classification failed for " + image.id + ", using fallback: " +
                                e.what());
        }
        return ImageType::descriptive;
    }

    struct Pattern {
        ImageType type;
        const char* needle;
    };
    // Checked in order; the more specific phrases come first.
    static const Pattern patterns[] = {
        {ImageType::attack_flow, "attack flow"},
        {ImageType::attack_flow, "intelligence structure"},
        {ImageType::attack_flow, "flowchart"},
        {ImageType::attack_flow, "flow diagram"},
        {ImageType::malware_code, "malware code"},
        {ImageType::tool_screenshot, "tool screenshot"},
        {ImageType::tool_screenshot, "application tool"},
        {ImageType::data_table, "data table"},
        {ImageType::chart, "data visualization"},
        {ImageType::chart, "chart"},
        {ImageType::file_paths, "file paths"},
        {ImageType::file_paths, "paths and names"},
        {ImageType::descriptive, "descriptive"},
        {ImageType::descriptive, "content explanation"},
        {ImageType::malware_code, "code"},
        {ImageType::tool_screenshot, "screenshot"},
        {ImageType::data_table, "table"},
    };
    for (const Pattern& p : patterns) {
        if (reply.find(p.needle) != std::string::npos) return p.type;
    }
    if (warnings != nullptr) {
        warnings->push_back("unrecognized image type \"" + reply + "\" for " + image.id +
                            ", using fallback category");
    }
    return ImageType::descriptive;
}

}  // namespace ctig
