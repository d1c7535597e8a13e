#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctig/gateway.hpp"
#include "ctig/graph.hpp"

namespace ctig {

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MediaType { png, jpeg };
std::string_view media_type_mime(MediaType m);

// The seven threat-image categories.
enum class ImageType {
    attack_flow,      // attack-flow/intelligence-structure
    malware_code,     // malware-code
    tool_screenshot,  // application-tool-screenshot
    data_table,       // data-table
    chart,            // chart/data-visualization
    file_paths,       // file-paths/names
    descriptive,      // descriptive/content-explanation
};

inline constexpr ImageType kAllImageTypes[] = {
    ImageType::attack_flow, ImageType::malware_code, ImageType::tool_screenshot,
    ImageType::data_table,  ImageType::chart,        ImageType::file_paths,
    ImageType::descriptive,
};

std::string_view image_type_name(ImageType t);
std::string_view image_type_display(ImageType t);
std::optional<ImageType> image_type_from_name(std::string_view s);

struct ThreatImage {
    std::string id;
    std::filesystem::path file;
    MediaType media_type = MediaType::png;
    std::optional<ImageType> image_type;  // set by classification
    std::size_t anchor_offset = 0;        // character index into the report text
    std::string bytes;

    ImagePart as_part() const { return {std::string(media_type_mime(media_type)), bytes}; }
};

struct ReportBundle {
    std::string report_id;
    std::string text;
    std::vector<ThreatImage> images;
    std::optional<AttackGraph> text_graph;
    std::optional<std::filesystem::path> gold_path;
    std::filesystem::path root;
};

// Bundle layout: report.json manifest, text file with `![image-id]` anchor
// lines, images/, optional graph.text.json and gold.json.
ReportBundle load_bundle(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Pre-filter

struct ImageProbe {
    bool ok = false;
    int width = 0;
    int height = 0;
    std::string error;
};

std::optional<MediaType> sniff_media_type(std::string_view bytes);
ImageProbe probe_image(MediaType media_type, std::string_view bytes);

struct PrefilterRules {
    int min_width = 64;
    int min_height = 64;
    bool model_rules = false;  // rules (a)-(c); (d)-(e) are always on
};

struct PrefilterRejection {
    ThreatImage image;
    char rule = 'e';  // a..e
    std::string reason;
};

struct PrefilterResult {
    std::vector<ThreatImage> kept;
    std::vector<PrefilterRejection> rejected;
    std::vector<std::string> warnings;
};

PrefilterResult prefilter_images(const ReportBundle& bundle, const PrefilterRules& rules,
                                 Gateway* gateway = nullptr);

// ---------------------------------------------------------------------------
// Parsing-support contexts

struct ContextPair {
    std::string image_aware;
    std::string global;
};

struct ContextBudget {
    std::size_t context_chars = 1200;       // per derived context
    std::size_t gateway_input_chars = 6000; // above this, summarize in chunks
    int summary_max_tokens = 1024;
};

// Anchor paragraph plus one paragraph before and after; summarized when a
// gateway is supplied, raw window truncated to budget otherwise.
std::string image_aware_context(const ReportBundle& bundle, const ThreatImage& image,
                                Gateway* gateway, const ContextBudget& budget,
                                std::vector<std::string>* warnings = nullptr);

// Report-level abstract; chunked map-then-combine summarization when the
// text exceeds the gateway input budget.
std::string global_context(const ReportBundle& bundle, Gateway* gateway,
                           const ContextBudget& budget,
                           std::vector<std::string>* warnings = nullptr);

ImageType classify_image_type(const ThreatImage& image, const ContextPair& contexts,
                              Gateway& gateway, std::vector<std::string>* warnings = nullptr);

}  // namespace ctig
