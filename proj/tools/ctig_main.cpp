#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ctig/pipeline.hpp"

namespace {

// Exit codes: 0 ok, 2 config, 3 input, 4 gateway, 5 validation.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kInputError = 3,
    kGatewayError = 4,
    kValidationError = 5,
};

struct RunFlags {
    std::string bundle;
    std::string config_file;
    std::string out_dir;
    std::string mode;
    std::string transcripts;
    std::string bank;
    std::string catalog;
    bool no_image_context = false;
    bool no_global_context = false;
    bool no_brainstorm = false;
    bool no_verify = false;
};

ctig::PipelineConfig assemble_config(const RunFlags& flags) {
    ctig::PipelineConfig config;
    if (!flags.config_file.empty()) {
        config = ctig::PipelineConfig::load(flags.config_file);
    } else {
        config.apply_env_overrides();
    }
    if (!flags.mode.empty()) {
        auto mode = ctig::gateway_mode_from_name(flags.mode);
        if (!mode) throw ctig::ConfigError("unknown mode: " + flags.mode);
        config.mode = *mode;
    }
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (!flags.transcripts.empty()) config.transcript_path = flags.transcripts;
    if (!flags.bank.empty()) config.bank_path = flags.bank;
    if (!flags.catalog.empty()) config.catalog_path = flags.catalog;
    if (flags.no_image_context) config.extract_options.include_image_context = false;
    if (flags.no_global_context) config.extract_options.include_global_context = false;
    if (flags.no_brainstorm) config.use_brainstorm = false;
    if (flags.no_verify) config.use_verify = false;
    return config;
}

int cmd_run(const RunFlags& flags) {
    ctig::PipelineConfig config = assemble_config(flags);
    config.validate();
    ctig::RunOutcome outcome = ctig::run_pipeline(flags.bundle, config);
    std::cout << "run complete: " << outcome.counts.at("deltas_applied") << " deltas applied, "
              << outcome.counts.at("gateway_calls") << " gateway calls, "
              << outcome.warnings.size() << " warnings\n"
              << "gain: +" << outcome.gain.entity_count() << " entities, +"
              << outcome.gain.relation_count() << " relations, +"
              << outcome.gain.technique_count() << " techniques\n"
              << "artifacts in " << config.out_dir.string() << "\n";
    return kOk;
}

int cmd_eval(const std::string& graph_path, const std::string& gold_path, double threshold,
             bool as_json, const std::string& out_path) {
    ctig::AttackGraph graph = ctig::load_graph(graph_path);
    ctig::GoldAnnotation gold = ctig::GoldAnnotation::load(gold_path);
    ctig::MatchConfig cfg;
    cfg.fuzzy_threshold = threshold;
    ctig::MetricReport report = ctig::score(graph, gold, cfg);
    std::string rendered =
        as_json ? report.to_json().dump(2) + "\n" : report.to_table();
    if (!out_path.empty()) {
        ctig::atomic_write(out_path, rendered);
    }
    std::cout << rendered;
    return kOk;
}

int cmd_report(const std::string& run_dir) {
    nlohmann::json stats = ctig::build_run_statistics(run_dir);
    std::cout << stats.dump(2) << "\n";
    return kOk;
}

int cmd_validate(const std::string& bundle_path) {
    ctig::ReportBundle bundle = ctig::load_bundle(bundle_path);
    std::vector<ctig::Violation> violations;
    if (bundle.text_graph) violations = ctig::validate_graph(*bundle.text_graph);
    if (violations.empty()) {
        std::cout << "bundle " << bundle.report_id << " is valid (" << bundle.images.size()
                  << " images)\n";
        return kOk;
    }
    for (const ctig::Violation& v : violations) {
        std::cout << v.rule << " @ " << v.element << ": " << v.message << "\n";
    }
    return kValidationError;
}

int cmd_export(const std::string& graph_path, const std::string& format,
               const std::string& out_path) {
    ctig::AttackGraph graph = ctig::load_graph(graph_path);
    std::string rendered;
    if (format == "dot") {
        rendered = ctig::export_dot(graph);
    } else if (format == "html") {
        rendered = ctig::export_html(graph);
    } else if (format == "json") {
        rendered = ctig::to_canonical_json(graph);
    } else {
        throw CLI::ValidationError("--format", "must be dot, html, or json");
    }
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        ctig::atomic_write(out_path, rendered);
        std::cout << "wrote " << out_path << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CTI report image parsing and multimodal attack-graph construction"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Run the full pipeline over a report bundle");
    run->add_option("bundle", run_flags.bundle, "Bundle directory")->required();
    run->add_option("--config", run_flags.config_file, "Pipeline config JSON");
    run->add_option("--out", run_flags.out_dir, "Output directory for staged artifacts");
    run->add_option("--mode", run_flags.mode, "Gateway mode: live, replay, or record");
    run->add_option("--transcripts", run_flags.transcripts, "Transcript JSONL path");
    run->add_option("--bank", run_flags.bank, "Leading-question bank JSON");
    run->add_option("--catalog", run_flags.catalog, "Technique catalog JSON");
    run->add_flag("--no-image-context", run_flags.no_image_context,
                  "Drop the image-aware context from prompts");
    run->add_flag("--no-global-context", run_flags.no_global_context,
                  "Drop the report-level context from prompts");
    run->add_flag("--no-brainstorm", run_flags.no_brainstorm,
                  "Use only the leading questions, no generated ones");
    run->add_flag("--no-verify", run_flags.no_verify, "Skip question filtering and refinement");

    std::string eval_graph, eval_gold, eval_out;
    double eval_threshold = 0.85;
    bool eval_json = false;
    CLI::App* eval = app.add_subcommand("eval", "Score a graph against a gold annotation");
    eval->add_option("--graph", eval_graph, "Predicted graph JSON")->required();
    eval->add_option("--gold", eval_gold, "Gold annotation JSON")->required();
    eval->add_option("--threshold", eval_threshold, "Fuzzy match threshold");
    eval->add_flag("--json", eval_json, "Emit the report as JSON");
    eval->add_option("--out", eval_out, "Also write the report to this file");

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "Aggregate statistics from a run directory");
    report->add_option("run_dir", report_dir, "Run output directory")->required();

    std::string validate_bundle;
    CLI::App* validate = app.add_subcommand("validate", "Check a bundle and its text graph");
    validate->add_option("bundle", validate_bundle, "Bundle directory")->required();

    std::string export_graph, export_format = "dot", export_out;
    CLI::App* exporter = app.add_subcommand("export", "Export a graph as dot, html, or json");
    exporter->add_option("--graph", export_graph, "Graph JSON path")->required();
    exporter->add_option("--format", export_format, "dot, html, or json");
    exporter->add_option("--out", export_out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_flags);
        if (eval->parsed()) return cmd_eval(eval_graph, eval_gold, eval_threshold, eval_json, eval_out);
        if (report->parsed()) return cmd_report(report_dir);
        if (validate->parsed()) return cmd_validate(validate_bundle);
        if (exporter->parsed()) return cmd_export(export_graph, export_format, export_out);
        return kConfigError;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    } catch (const ctig::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ctig::GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kGatewayError;
    } catch (const ctig::SchemaError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidationError;
    } catch (const ctig::CorpusError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const ctig::GraphError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const ctig::CatalogError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const ctig::BrainstormError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const ctig::EvaluateError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}
