#include "ctig/corpus.hpp"

#include <fstream>

#include "doctest.h"
#include "support/test_support.hpp"

using namespace ctig;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ReportBundle fixture_bundle() { return load_bundle(test::fixture_dir() / "bundle-stuxnet"); }

// A throwaway bundle directory assembled from parts.
struct TempBundle {
    std::filesystem::path root;

    TempBundle(const std::string& name, const std::string& manifest, const std::string& text) {
        root = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(root);
        std::filesystem::create_directories(root / "images");
        std::ofstream(root / "report.json") << manifest;
        std::ofstream(root / "text.md") << text;
    }

    void put_image(const std::string& rel, const std::filesystem::path& src) {
        std::filesystem::copy_file(src, root / rel,
                                   std::filesystem::copy_options::overwrite_existing);
    }
};

}  // namespace

TEST_CASE("image probing") {
    std::string flow = slurp(test::fixture_dir() / "bundle-stuxnet/images/flow.png");
    std::string jpg = slurp(test::fixture_dir() / "misc/photo.jpg");
    std::string truncated = slurp(test::fixture_dir() / "misc/truncated.png");
    std::string junk = slurp(test::fixture_dir() / "misc/not_image.bin");

    CHECK(sniff_media_type(flow) == MediaType::png);
    CHECK(sniff_media_type(jpg) == MediaType::jpeg);
    CHECK_FALSE(sniff_media_type(junk));

    ImageProbe png_probe = probe_image(MediaType::png, flow);
    CHECK(png_probe.ok);
    CHECK(png_probe.width == 320);
    CHECK(png_probe.height == 200);

    ImageProbe jpg_probe = probe_image(MediaType::jpeg, jpg);
    CHECK(jpg_probe.ok);
    CHECK(jpg_probe.width == 120);
    CHECK(jpg_probe.height == 90);

    ImageProbe bad = probe_image(MediaType::png, truncated);
    CHECK_FALSE(bad.ok);
    CHECK(!bad.error.empty());
}

TEST_CASE("load_bundle resolves anchors and sniffs media types") {
    ReportBundle bundle = fixture_bundle();
    CHECK(bundle.report_id == "stuxnet-demo");
    REQUIRE(bundle.images.size() == 2);
    CHECK(bundle.images[0].id == "img-flow");
    CHECK(bundle.images[0].media_type == MediaType::png);
    CHECK(bundle.images[0].anchor_offset > 0);
    CHECK(bundle.text.substr(bundle.images[0].anchor_offset, 11) == "![img-flow]");
    CHECK(bundle.images[1].anchor_offset > bundle.images[0].anchor_offset);
    REQUIRE(bundle.text_graph);
    CHECK(bundle.text_graph->entities.size() == 4);
    CHECK(bundle.gold_path);
}

TEST_CASE("load_bundle error paths") {
    SUBCASE("missing manifest") {
        CHECK_THROWS_WITH_AS(load_bundle(std::filesystem::temp_directory_path() / "nope"),
                             doctest::Contains("missing manifest"), CorpusError);
    }

    SUBCASE("anchor with no image entry") {
        TempBundle tb("ctig_bundle_anchor",
                      R"({"report_id": "x", "text": "text.md", "images": []})",
                      "para one\n\n![ghost-image]\n\npara two\n");
        CHECK_THROWS_WITH_AS(load_bundle(tb.root), doctest::Contains("unresolved anchor"),
                             CorpusError);
    }

    SUBCASE("image entry with no anchor") {
        TempBundle tb("ctig_bundle_noanchor",
                      R"({"report_id": "x", "text": "text.md",
                          "images": [{"id": "img-a", "file": "images/a.png"}]})",
                      "no anchors here\n");
        tb.put_image("images/a.png", test::fixture_dir() / "misc/tiny.png");
        CHECK_THROWS_WITH_AS(load_bundle(tb.root), doctest::Contains("unresolved anchor"),
                             CorpusError);
    }

    SUBCASE("unknown magic bytes") {
        TempBundle tb("ctig_bundle_junk",
                      R"({"report_id": "x", "text": "text.md",
                          "images": [{"id": "img-a", "file": "images/a.png"}]})",
                      "![img-a]\n");
        tb.put_image("images/a.png", test::fixture_dir() / "misc/not_image.bin");
        CHECK_THROWS_WITH_AS(load_bundle(tb.root), doctest::Contains("undecodable"), CorpusError);
    }

    SUBCASE("gold is optional") {
        TempBundle tb("ctig_bundle_nogold",
                      R"({"report_id": "x", "text": "text.md",
                          "images": [{"id": "img-a", "file": "images/a.png"}]})",
                      "![img-a]\n");
        tb.put_image("images/a.png", test::fixture_dir() / "misc/tiny.png");
        ReportBundle bundle = load_bundle(tb.root);
        CHECK_FALSE(bundle.gold_path);
        CHECK_FALSE(bundle.text_graph);
    }
}

TEST_CASE("prefilter applies the deterministic rules") {
    TempBundle tb("ctig_bundle_prefilter",
                  R"({"report_id": "x", "text": "text.md", "images": [
                      {"id": "img-ok", "file": "images/ok.png"},
                      {"id": "img-tiny", "file": "images/tiny.png"},
                      {"id": "img-trunc", "file": "images/trunc.png"}]})",
                  "![img-ok]\n\n![img-tiny]\n\n![img-trunc]\n");
    tb.put_image("images/ok.png", test::fixture_dir() / "bundle-stuxnet/images/flow.png");
    tb.put_image("images/tiny.png", test::fixture_dir() / "misc/tiny.png");
    tb.put_image("images/trunc.png", test::fixture_dir() / "misc/truncated.png");

    ReportBundle bundle = load_bundle(tb.root);
    PrefilterResult result = prefilter_images(bundle, PrefilterRules{});

    REQUIRE(result.kept.size() == 1);
    CHECK(result.kept[0].id == "img-ok");
    REQUIRE(result.rejected.size() == 2);
    // Partition: kept and rejected cover the input exactly.
    CHECK(result.kept.size() + result.rejected.size() == bundle.images.size());
    for (const PrefilterRejection& r : result.rejected) {
        if (r.image.id == "img-tiny") CHECK(r.rule == 'd');
        if (r.image.id == "img-trunc") CHECK(r.rule == 'e');
    }
}

TEST_CASE("model-assisted prefilter rules") {
    ReportBundle bundle = fixture_bundle();
    PrefilterRules rules;
    rules.model_rules = true;

    SUBCASE("logo screen rejects with rule a") {
        test::ScriptedGateway gateway({"yes", "no", "no", "no"});
        PrefilterResult result = prefilter_images(bundle, rules, &gateway);
        REQUIRE(result.rejected.size() == 1);
        CHECK(result.rejected[0].rule == 'a');
        CHECK(result.kept.size() == 1);
    }

    SUBCASE("gateway failure keeps the image") {
        test::ExplodingGateway gateway;
        PrefilterResult result = prefilter_images(bundle, rules, &gateway);
        CHECK(result.kept.size() == 2);
        CHECK(result.rejected.empty());
        CHECK(result.warnings.size() == 6);  // three rules per image
    }
}

TEST_CASE("image-aware context windows") {
    ReportBundle bundle = fixture_bundle();
    ContextBudget budget;

    SUBCASE("anchor paragraph plus neighbours, markers stripped") {
        std::string ctx = image_aware_context(bundle, bundle.images[0], nullptr, budget);
        CHECK(ctx.find("flow diagram below") != std::string::npos);      // before
        CHECK(ctx.find("zero-day") != std::string::npos);               // after
        CHECK(ctx.find("![img-flow]") == std::string::npos);            // marker gone
        CHECK(ctx.find("Command-and-control") == std::string::npos);    // out of window
        CHECK(ctx.size() <= budget.context_chars);
    }

    SUBCASE("window is clipped at the text boundary") {
        TempBundle tb("ctig_bundle_first",
                      R"({"report_id": "x", "text": "text.md",
                          "images": [{"id": "img-a", "file": "images/a.png"}]})",
                      "![img-a]\nanchor paragraph text\n\nsecond paragraph\n\nthird paragraph\n");
        tb.put_image("images/a.png", test::fixture_dir() / "misc/tiny.png");
        ReportBundle b = load_bundle(tb.root);
        std::string ctx = image_aware_context(b, b.images[0], nullptr, budget);
        CHECK(ctx.find("anchor paragraph text") != std::string::npos);
        CHECK(ctx.find("second paragraph") != std::string::npos);
        CHECK(ctx.find("third paragraph") == std::string::npos);
    }

    SUBCASE("replay-style gateway returns the recorded summary") {
        test::ScriptedGateway gateway({"A compact summary of the infection chain."});
        std::string ctx = image_aware_context(bundle, bundle.images[0], &gateway, budget);
        CHECK(ctx == "A compact summary of the infection chain.");
    }

    SUBCASE("gateway failure falls back to the raw window") {
        test::ExplodingGateway gateway;
        std::vector<std::string> warnings;
        std::string ctx = image_aware_context(bundle, bundle.images[0], &gateway, budget, &warnings);
        CHECK(ctx.find("flow diagram") != std::string::npos);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("global context") {
    ReportBundle bundle = fixture_bundle();
    ContextBudget budget;

    SUBCASE("no gateway returns the truncated raw text") {
        std::string ctx = global_context(bundle, nullptr, budget);
        CHECK(ctx.size() <= budget.context_chars);
        CHECK(ctx.find("Stuxnet worm") != std::string::npos);
    }

    SUBCASE("one-paragraph report without a gateway is that paragraph") {
        TempBundle tb("ctig_bundle_onepara",
                      R"({"report_id": "x", "text": "text.md", "images": []})",
                      "just a single paragraph report\n");
        std::string ctx = global_context(load_bundle(tb.root), nullptr, budget);
        CHECK(ctx == "just a single paragraph report");
    }

    SUBCASE("empty text is an error") {
        TempBundle tb("ctig_bundle_empty",
                      R"({"report_id": "x", "text": "text.md", "images": []})", "   \n  \n");
        CHECK_THROWS_WITH_AS(global_context(load_bundle(tb.root), nullptr, budget),
                             doctest::Contains("empty-report"), CorpusError);
    }

    SUBCASE("recorded abstract comes back under replay") {
        test::ScriptedGateway gateway({"Report abstract: Stuxnet spreads via USB."});
        std::string ctx = global_context(bundle, &gateway, budget);
        CHECK(ctx == "Report abstract: Stuxnet spreads via USB.");
    }

    SUBCASE("long text goes through map-then-combine summarization") {
        std::string manifest = R"({"report_id": "x", "text": "text.md", "images": []})";
        std::string text;
        for (int i = 0; i < 40; ++i) {
            text += "Paragraph " + std::to_string(i) +
                    " repeats filler content about the campaign to grow the report well past "
                    "the gateway input budget so chunking has to happen.\n\n";
        }
        TempBundle tb("ctig_bundle_long", manifest, text);
        ContextBudget small = budget;
        small.gateway_input_chars = 600;
        test::RuleGateway gateway;
        gateway.add_rule([](const ChatRequest& req, std::string& out) {
            if (test::first_text(req).find("Merge them into a single abstract") !=
                std::string::npos) {
                out = "combined abstract";
                return true;
            }
            return false;
        });
        gateway.set_fallback("chunk summary");
        std::string ctx = global_context(load_bundle(tb.root), &gateway, small);
        CHECK(ctx == "combined abstract");
        CHECK(gateway.call_count() > 2);
    }
}

TEST_CASE("image type classification") {
    ReportBundle bundle = fixture_bundle();
    ContextPair contexts{"image ctx", "global ctx"};

    SUBCASE("recorded answers map onto categories") {
        test::ScriptedGateway gateway({"Malware Code"});
        CHECK(classify_image_type(bundle.images[0], contexts, gateway) == ImageType::malware_code);
        test::ScriptedGateway gateway2({"This is a Data Table."});
        CHECK(classify_image_type(bundle.images[0], contexts, gateway2) == ImageType::data_table);
        test::ScriptedGateway gateway3({"Attack Flow or Intelligence Structure"});
        CHECK(classify_image_type(bundle.images[0], contexts, gateway3) == ImageType::attack_flow);
    }

    SUBCASE("gibberish falls back to the descriptive category") {
        test::ScriptedGateway gateway({"zebra pancakes"});
        std::vector<std::string> warnings;
        CHECK(classify_image_type(bundle.images[0], contexts, gateway, &warnings) ==
              ImageType::descriptive);
        CHECK(warnings.size() == 1);
    }

    SUBCASE("gateway failure falls back with a warning") {
        test::ExplodingGateway gateway;
        std::vector<std::string> warnings;
        CHECK(classify_image_type(bundle.images[0], contexts, gateway, &warnings) ==
              ImageType::descriptive);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("image type names round trip") {
    for (ImageType t : kAllImageTypes) {
        auto parsed = image_type_from_name(image_type_name(t));
        REQUIRE(parsed);
        CHECK(*parsed == t);
    }
    CHECK_FALSE(image_type_from_name("selfie"));
}
