#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctig/brainstorm.hpp"
#include "ctig/corpus.hpp"
#include "ctig/evaluate.hpp"
#include "ctig/extract.hpp"
#include "ctig/gateway.hpp"
#include "ctig/integrate.hpp"
#include "ctig/verify.hpp"

namespace ctig {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GatewayMode { live, replay, record };
std::string_view gateway_mode_name(GatewayMode m);
std::optional<GatewayMode> gateway_mode_from_name(std::string_view s);

struct PipelineConfig {
    GatewayMode mode = GatewayMode::replay;
    std::string endpoint;
    std::string api_key;
    ChatProfile profile;  // model, temperature, seed
    int max_tokens = 512;
    int concurrency = 4;
    int max_attempts = 3;
    int backoff_initial_ms = 200;

    RefinementConfig refinement;
    VerifyOptions verify_options;
    ExtractOptions extract_options;
    ContextBudget budgets;
    MatchConfig match;
    PrefilterRules prefilter;
    std::size_t question_cap = 40;
    std::vector<std::string> ontology_vocab = kDefaultOntologyVocab;

    bool use_brainstorm = true;  // off: pool = leading questions only
    bool use_verify = true;      // off: skip filtering and refinement

    std::filesystem::path transcript_path;
    std::filesystem::path out_dir = "out";
    std::filesystem::path bank_path = "data/leading_questions.json";
    std::filesystem::path catalog_path = "data/attack_catalog.json";

    // JSON config file; unknown keys rejected. Env vars CTIG_ENDPOINT,
    // CTIG_API_KEY, and CTIG_MODEL override afterwards.
    static PipelineConfig load(const std::filesystem::path& file);
    void apply_env_overrides();
    void validate() const;
};

// Builds the gateway for the configured mode; owns the transcript store.
class GatewayHandle {
public:
    static GatewayHandle open(const PipelineConfig& config);

    Gateway& gateway() { return outer_ ? *outer_ : *live_; }
    const Gateway* live_observer() const { return live_.get(); }
    std::uint64_t live_calls() const { return live_ ? live_->call_count() : 0; }

private:
    std::unique_ptr<TranscriptStore> store_;
    std::unique_ptr<Gateway> live_;   // live HTTP gateway when mode uses one
    std::unique_ptr<Gateway> outer_;  // replay or recording wrapper
};

struct StageTiming {
    std::string stage;
    double milliseconds = 0.0;
};

struct RunOutcome {
    AttackGraph multimodal_graph;
    GainReport gain;
    std::vector<StageTiming> timings;
    std::map<std::string, std::int64_t> counts;
    std::vector<std::string> warnings;
};

// Full pipeline over one bundle; writes the staged artifacts into
// config.out_dir and returns the in-memory outcome.
RunOutcome run_pipeline(const std::filesystem::path& bundle_path, const PipelineConfig& config);

// Same pipeline against an injected gateway (tests, fixture generation).
// live_observer, when given, supplies the live-call count for the run report.
RunOutcome run_pipeline(const std::filesystem::path& bundle_path, const PipelineConfig& config,
                        Gateway& gateway, const Gateway* live_observer = nullptr);

// Aggregated statistics from a finished run directory; no gateway involved.
nlohmann::json build_run_statistics(const std::filesystem::path& run_dir);

void atomic_write(const std::filesystem::path& path, std::string_view content);

// Artifact (de)serialization shared by run_pipeline and the report command.
nlohmann::json question_to_json(const Question& q);
Question question_from_json(const nlohmann::json& j);
nlohmann::json answer_to_json(const Answer& a);
Answer answer_from_json(const nlohmann::json& j);

}  // namespace ctig
