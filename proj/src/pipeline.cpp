#include "ctig/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "ctig/text_util.hpp"

namespace ctig {

std::string_view gateway_mode_name(GatewayMode m) {
    switch (m) {
        case GatewayMode::live: return "live";
        case GatewayMode::replay: return "replay";
        case GatewayMode::record: return "record";
    }
    return "replay";
}

std::optional<GatewayMode> gateway_mode_from_name(std::string_view s) {
    if (s == "live") return GatewayMode::live;
    if (s == "replay") return GatewayMode::replay;
    if (s == "record") return GatewayMode::record;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string json_read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

    PipelineConfig config;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "mode") {
                auto mode = gateway_mode_from_name(value.get<std::string>());
                if (!mode) throw ConfigError("mode must be live, replay, or record");
                config.mode = *mode;
            } else if (key == "endpoint") {
                config.endpoint = value.get<std::string>();
            } else if (key == "api_key") {
                config.api_key = value.get<std::string>();
            } else if (key == "model") {
                config.profile.model = value.get<std::string>();
            } else if (key == "temperature") {
                config.profile.temperature = value.get<double>();
            } else if (key == "seed") {
                config.profile.seed = value.get<std::int64_t>();
            } else if (key == "max_tokens") {
                config.max_tokens = value.get<int>();
            } else if (key == "summary_max_tokens") {
                config.budgets.summary_max_tokens = value.get<int>();
            } else if (key == "concurrency") {
                config.concurrency = value.get<int>();
            } else if (key == "max_attempts") {
                config.max_attempts = value.get<int>();
            } else if (key == "backoff_initial_ms") {
                config.backoff_initial_ms = value.get<int>();
            } else if (key == "paradigm") {
                auto paradigm = paradigm_from_name(value.get<std::string>());
                if (!paradigm) throw ConfigError("paradigm must be q_led or a_iteration");
                config.refinement.paradigm = *paradigm;
            } else if (key == "max_rounds") {
                config.refinement.max_rounds = value.get<int>();
            } else if (key == "accept_levels") {
                config.refinement.accept_levels.clear();
                for (const auto& level : value) {
                    auto l = quality_level_from_name(level.get<std::string>());
                    if (!l) throw ConfigError("unknown accept level: " + level.get<std::string>());
                    config.refinement.accept_levels.insert(*l);
                }
            } else if (key == "failing_phrases") {
                config.verify_options.failing_phrases = value.get<std::vector<std::string>>();
            } else if (key == "assess_dimensions") {
                config.verify_options.assess_dimensions = value.get<bool>();
            } else if (key == "context_chars") {
                config.budgets.context_chars = value.get<std::size_t>();
            } else if (key == "gateway_input_chars") {
                config.budgets.gateway_input_chars = value.get<std::size_t>();
            } else if (key == "answer_char_budget") {
                config.extract_options.answer_char_budget = value.get<std::size_t>();
            } else if (key == "fuzzy_threshold") {
                config.match.fuzzy_threshold = value.get<double>();
            } else if (key == "min_width") {
                config.prefilter.min_width = value.get<int>();
            } else if (key == "min_height") {
                config.prefilter.min_height = value.get<int>();
            } else if (key == "model_prefilter") {
                config.prefilter.model_rules = value.get<bool>();
            } else if (key == "question_cap") {
                config.question_cap = value.get<std::size_t>();
            } else if (key == "ontology_vocab") {
                config.ontology_vocab = value.get<std::vector<std::string>>();
            } else if (key == "use_image_context") {
                config.extract_options.include_image_context = value.get<bool>();
            } else if (key == "use_global_context") {
                config.extract_options.include_global_context = value.get<bool>();
            } else if (key == "use_brainstorm") {
                config.use_brainstorm = value.get<bool>();
            } else if (key == "use_verify") {
                config.use_verify = value.get<bool>();
            } else if (key == "transcripts") {
                config.transcript_path = value.get<std::string>();
            } else if (key == "out_dir") {
                config.out_dir = value.get<std::string>();
            } else if (key == "bank") {
                config.bank_path = value.get<std::string>();
            } else if (key == "catalog") {
                config.catalog_path = value.get<std::string>();
            } else {
                throw ConfigError("unknown config key: \"" + key + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key \"" + key + "\": " + e.what());
        }
    }
    config.apply_env_overrides();
    return config;
}

void PipelineConfig::apply_env_overrides() {
    if (const char* endpoint = std::getenv("CTIG_ENDPOINT")) this->endpoint = endpoint;
    if (const char* key = std::getenv("CTIG_API_KEY")) this->api_key = key;
    if (const char* model = std::getenv("CTIG_MODEL")) this->profile.model = model;
}

void PipelineConfig::validate() const {
    if (mode != GatewayMode::live && transcript_path.empty()) {
        throw ConfigError(std::string(gateway_mode_name(mode)) +
                          " mode requires a transcript path");
    }
    if (mode != GatewayMode::replay) {
        if (endpoint.empty()) throw ConfigError("live/record mode requires an endpoint");
        if (api_key.empty()) throw ConfigError("live/record mode requires an API key");
    }
    if (refinement.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    if (refinement.accept_levels.empty()) throw ConfigError("accept_levels must not be empty");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (match.fuzzy_threshold < 0.0 || match.fuzzy_threshold > 1.0) {
        throw ConfigError("fuzzy_threshold must be within [0, 1]");
    }
}

// ---------------------------------------------------------------------------
// Gateway wiring

GatewayHandle GatewayHandle::open(const PipelineConfig& config) {
    config.validate();
    GatewayHandle handle;
    switch (config.mode) {
        case GatewayMode::replay: {
            handle.store_ = std::make_unique<TranscriptStore>(
                TranscriptStore::load(config.transcript_path));
            handle.outer_ = std::make_unique<ReplayGateway>(*handle.store_);
            break;
        }
        case GatewayMode::live:
        case GatewayMode::record: {
            HttpGatewayConfig http;
            http.endpoint = config.endpoint;
            http.api_key = config.api_key;
            http.max_attempts = config.max_attempts;
            http.backoff_initial_ms = config.backoff_initial_ms;
            http.max_inflight = config.concurrency;
            handle.live_ = std::make_unique<HttpGateway>(std::move(http));
            handle.live_->set_profile(config.profile);
            if (config.mode == GatewayMode::record) {
                handle.store_ = std::make_unique<TranscriptStore>();
                if (std::filesystem::exists(config.transcript_path)) {
                    *handle.store_ = TranscriptStore::load(config.transcript_path);
                }
                handle.store_->bind(config.transcript_path);
                handle.outer_ =
                    std::make_unique<RecordingGateway>(*handle.live_, *handle.store_);
            }
            break;
        }
    }
    if (handle.outer_) handle.outer_->set_profile(config.profile);
    return handle;
}

// ---------------------------------------------------------------------------
// Artifact serialization

nlohmann::json question_to_json(const Question& q) {
    nlohmann::json j;
    j["id"] = q.id;
    j["image_id"] = q.image_id;
    j["text"] = q.text;
    j["kind"] = std::string(question_kind_name(q.kind));
    j["filter_label"] =
        q.filter_label ? nlohmann::json(std::string(filter_label_name(*q.filter_label)))
                       : nlohmann::json(nullptr);
    return j;
}

Question question_from_json(const nlohmann::json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.image_id = j.at("image_id").get<std::string>();
    q.text = j.at("text").get<std::string>();
    auto kind = question_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw ConfigError("unknown question kind in artifact");
    q.kind = *kind;
    if (j.contains("filter_label") && j["filter_label"].is_string()) {
        q.filter_label = filter_label_from_name(j["filter_label"].get<std::string>());
    }
    return q;
}

namespace {

nlohmann::json quality_to_json(const QualityAssessment& q) {
    nlohmann::json j;
    j["level"] = std::string(quality_level_name(q.level));
    if (q.dimension_scores) j["dimension_scores"] = *q.dimension_scores;
    if (q.comment) j["comment"] = *q.comment;
    if (q.suggestion) j["suggestion"] = *q.suggestion;
    return j;
}

QualityAssessment quality_from_json(const nlohmann::json& j) {
    QualityAssessment q;
    auto level = quality_level_from_name(j.at("level").get<std::string>());
    if (!level) throw ConfigError("unknown quality level in artifact");
    q.level = *level;
    if (j.contains("dimension_scores")) {
        q.dimension_scores = j["dimension_scores"].get<std::map<std::string, int>>();
    }
    if (j.contains("comment")) q.comment = j["comment"].get<std::string>();
    if (j.contains("suggestion")) q.suggestion = j["suggestion"].get<std::string>();
    return q;
}

}  // namespace

nlohmann::json answer_to_json(const Answer& a) {
    nlohmann::json j;
    j["question_id"] = a.question_id;
    j["text"] = a.text;
    j["round"] = a.round;
    j["aborted"] = a.aborted;
    j["quality"] = a.quality ? quality_to_json(*a.quality) : nlohmann::json(nullptr);
    j["history"] = nlohmann::json::array();
    for (const AnswerRound& r : a.history) {
        nlohmann::json row;
        row["round"] = r.round;
        row["text"] = r.text;
        row["quality"] = r.quality ? quality_to_json(*r.quality) : nlohmann::json(nullptr);
        if (r.suggestion) row["suggestion"] = *r.suggestion;
        j["history"].push_back(std::move(row));
    }
    return j;
}

Answer answer_from_json(const nlohmann::json& j) {
    Answer a;
    a.question_id = j.at("question_id").get<std::string>();
    a.text = j.at("text").get<std::string>();
    a.round = j.at("round").get<int>();
    a.aborted = j.value("aborted", false);
    if (j.contains("quality") && j["quality"].is_object()) {
        a.quality = quality_from_json(j["quality"]);
    }
    for (const auto& row : j.at("history")) {
        AnswerRound r;
        r.round = row.at("round").get<int>();
        r.text = row.at("text").get<std::string>();
        if (row.contains("quality") && row["quality"].is_object()) {
            r.quality = quality_from_json(row["quality"]);
        }
        if (row.contains("suggestion")) r.suggestion = row["suggestion"].get<std::string>();
        a.history.push_back(std::move(r));
    }
    return a;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Pipeline run

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename F>
    auto time(const std::string& stage, F&& body) {
        auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            record(stage, start);
        } else {
            auto result = body();
            record(stage, start);
            return result;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        auto end = std::chrono::steady_clock::now();
        sink_.push_back(
            {stage, std::chrono::duration<double, std::milli>(end - start).count()});
    }
    std::vector<StageTiming>& sink_;
};

std::string dump_pretty(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

RunOutcome run_pipeline(const std::filesystem::path& bundle_path, const PipelineConfig& config) {
    GatewayHandle handle = GatewayHandle::open(config);
    return run_pipeline(bundle_path, config, handle.gateway(), handle.live_observer());
}

RunOutcome run_pipeline(const std::filesystem::path& bundle_path, const PipelineConfig& config,
                        Gateway& gateway, const Gateway* live_observer) {
    RunOutcome outcome;
    StageClock clock(outcome.timings);

    TechniqueCatalog catalog = TechniqueCatalog::load(config.catalog_path);
    LeadingQuestionBank bank = LeadingQuestionBank::load(config.bank_path);

    ReportBundle bundle =
        clock.time("load", [&] { return load_bundle(bundle_path); });
    if (!bundle.text_graph) {
        throw CorpusError("bundle " + bundle.report_id +
                          " has no text attack graph; integration needs one");
    }
    AttackGraph text_graph = *bundle.text_graph;
    std::string graph_summary = graph_triplet_listing(text_graph);

    PrefilterResult prefiltered = clock.time("prefilter", [&] {
        return prefilter_images(bundle, config.prefilter,
                                config.prefilter.model_rules ? &gateway : nullptr);
    });
    for (const std::string& w : prefiltered.warnings) outcome.warnings.push_back(w);

    // Contexts, then classification (classification consumes the contexts).
    std::string global = clock.time("global-context", [&] {
        return global_context(bundle, &gateway, config.budgets, &outcome.warnings);
    });

    struct ImageWork {
        ThreatImage image;
        ContextPair contexts;
        QuestionPool pool;
        std::map<std::string, Answer> answers;  // question id -> answer
    };
    std::vector<ImageWork> work;

    clock.time("image-context", [&] {
        for (ThreatImage& image : prefiltered.kept) {
            ImageWork w;
            w.contexts.global = global;
            w.contexts.image_aware = image_aware_context(bundle, image, &gateway, config.budgets,
                                                         &outcome.warnings);
            w.image = std::move(image);
            work.push_back(std::move(w));
        }
    });

    clock.time("classify", [&] {
        for (ImageWork& w : work) {
            w.image.image_type =
                classify_image_type(w.image, w.contexts, gateway, &outcome.warnings);
        }
    });

    clock.time("brainstorm", [&] {
        for (ImageWork& w : work) {
            std::vector<Question> general;
            std::vector<Question> task;
            if (config.use_brainstorm) {
                general = generate_general_questions(w.image, bank, w.contexts, gateway,
                                                     &outcome.warnings);
                task = generate_task_questions(w.image, graph_summary, w.contexts, gateway,
                                               &outcome.warnings);
            } else {
                // Ablation: the pool is the leading questions themselves.
                for (const std::string& seed : bank.for_type(*w.image.image_type)) {
                    Question q;
                    q.image_id = w.image.id;
                    q.text = seed;
                    q.kind = QuestionKind::general;
                    general.push_back(std::move(q));
                }
            }
            w.pool = build_pool(general, task, config.question_cap);
        }
    });

    clock.time("extract", [&] {
        for (ImageWork& w : work) {
            for (const Question& q : w.pool.questions) {
                try {
                    w.answers.emplace(q.id,
                                      answer_question(q, w.image, w.contexts, gateway,
                                                      config.extract_options, &outcome.warnings));
                } catch (const ExtractError& e) {
                    outcome.warnings.push_back(std::string("extraction failed: ") + e.what());
                }
            }
        }
    });

    clock.time("verify", [&] {
        for (ImageWork& w : work) {
            for (Question& q : w.pool.questions) {
                auto answer_it = w.answers.find(q.id);
                if (!config.use_verify) {
                    q.filter_label = FilterLabel::answer_oriented;
                    continue;
                }
                q.filter_label = filter_question_direct(q, graph_summary, gateway,
                                                        &outcome.warnings);
                if (!q.filter_label) {
                    if (answer_it == w.answers.end()) {
                        q.filter_label = FilterLabel::non_related;
                    } else {
                        q.filter_label = filter_question_answer_oriented(
                            q, answer_it->second, gateway, &outcome.warnings);
                    }
                }
                if (*q.filter_label == FilterLabel::non_related ||
                    answer_it == w.answers.end()) {
                    continue;
                }
                Answer& answer = answer_it->second;
                answer.quality = assess_answer(answer, q, w.image, gateway,
                                               config.verify_options, &outcome.warnings);
                answer.history.back().quality = answer.quality;
                if (config.refinement.accept_levels.count(answer.quality->level) == 0 &&
                    config.refinement.max_rounds > 1) {
                    answer = refine_answer(std::move(answer), q, w.image, w.contexts,
                                           config.refinement, gateway, config.verify_options,
                                           config.extract_options, &outcome.warnings);
                }
            }
        }
    });

    // Enhancement references from accepted candidate answers.
    std::vector<EnhancementReference> references;
    clock.time("references", [&] {
        for (ImageWork& w : work) {
            std::vector<std::pair<Question, Answer>> answered;
            for (const Question& q : w.pool.questions) {
                auto it = w.answers.find(q.id);
                if (it != w.answers.end()) answered.emplace_back(q, it->second);
            }
            std::string topic = derive_image_topic(w.image, answered);
            for (const auto& [q, answer] : answered) {
                if (!q.filter_label || *q.filter_label == FilterLabel::non_related) continue;
                if (config.use_verify) {
                    if (!answer.quality ||
                        config.refinement.accept_levels.count(answer.quality->level) == 0) {
                        continue;
                    }
                    references.push_back(
                        build_reference(w.image, q, answer, topic, config.refinement));
                } else {
                    // Ablation path: unassessed answers, unchecked build.
                    EnhancementReference ref;
                    ref.image_id = w.image.id;
                    ref.image_topic = topic;
                    ref.question_id = q.id;
                    ref.aspect = question_aspect(q.text);
                    ref.answer_text = answer.text;
                    ref.formatted = render_reference(ref.aspect, ref.image_topic, ref.answer_text);
                    references.push_back(std::move(ref));
                }
            }
        }
    });

    IntegrationResult integration = clock.time("integrate", [&] {
        return integrate_all(text_graph, references, config.ontology_vocab, catalog, gateway);
    });
    for (const std::string& w : integration.warnings) outcome.warnings.push_back(w);

    outcome.multimodal_graph = integration.graph;
    outcome.gain = diff_graphs(text_graph, integration.graph);

    // ---------------------------------------------------------------
    // Staged artifacts

    const std::filesystem::path& out = config.out_dir;
    std::filesystem::create_directories(out);

    nlohmann::json contexts_doc;
    contexts_doc["report_id"] = bundle.report_id;
    contexts_doc["global"] = global;
    contexts_doc["images"] = nlohmann::json::array();
    for (const ImageWork& w : work) {
        contexts_doc["images"].push_back(
            {{"image_id", w.image.id},
             {"image_type", std::string(image_type_name(*w.image.image_type))},
             {"image_aware", w.contexts.image_aware}});
    }
    contexts_doc["prefilter"] = nlohmann::json::object();
    contexts_doc["prefilter"]["kept"] = nlohmann::json::array();
    for (const ImageWork& w : work) contexts_doc["prefilter"]["kept"].push_back(w.image.id);
    contexts_doc["prefilter"]["rejected"] = nlohmann::json::array();
    for (const PrefilterRejection& r : prefiltered.rejected) {
        contexts_doc["prefilter"]["rejected"].push_back({{"image_id", r.image.id},
                                                         {"rule", std::string(1, r.rule)},
                                                         {"reason", r.reason}});
    }
    atomic_write(out / "contexts.json", dump_pretty(contexts_doc));

    nlohmann::json questions_doc;
    questions_doc["report_id"] = bundle.report_id;
    questions_doc["pools"] = nlohmann::json::array();
    std::int64_t question_count = 0;
    for (const ImageWork& w : work) {
        nlohmann::json pool;
        pool["image_id"] = w.pool.image_id.empty() ? w.image.id : w.pool.image_id;
        pool["questions"] = nlohmann::json::array();
        for (const Question& q : w.pool.questions) {
            pool["questions"].push_back(question_to_json(q));
            ++question_count;
        }
        questions_doc["pools"].push_back(std::move(pool));
    }
    atomic_write(out / "questions.json", dump_pretty(questions_doc));

    nlohmann::json answers_doc;
    answers_doc["report_id"] = bundle.report_id;
    answers_doc["answers"] = nlohmann::json::array();
    for (const ImageWork& w : work) {
        for (const auto& [question_id, answer] : w.answers) {
            answers_doc["answers"].push_back(answer_to_json(answer));
        }
    }
    atomic_write(out / "answers.json", dump_pretty(answers_doc));

    nlohmann::json deltas_doc;
    deltas_doc["report_id"] = bundle.report_id;
    deltas_doc["applied"] = nlohmann::json::array();
    for (const GraphDelta& d : integration.applied) deltas_doc["applied"].push_back(d.to_json());
    deltas_doc["rejected"] = nlohmann::json::array();
    for (const auto& [d, reason] : integration.rejected) {
        deltas_doc["rejected"].push_back({{"delta", d.to_json()}, {"reason", reason}});
    }
    atomic_write(out / "deltas.json", dump_pretty(deltas_doc));

    atomic_write(out / "graph.text.json", to_canonical_json(text_graph));
    atomic_write(out / "graph.mm.json", to_canonical_json(integration.graph));
    atomic_write(out / "graph.mm.dot", export_dot(integration.graph));
    atomic_write(out / "graph.mm.html", export_html(integration.graph));

    outcome.counts["images_total"] = static_cast<std::int64_t>(bundle.images.size());
    outcome.counts["images_kept"] = static_cast<std::int64_t>(work.size());
    outcome.counts["images_rejected"] = static_cast<std::int64_t>(prefiltered.rejected.size());
    outcome.counts["questions"] = question_count;
    outcome.counts["references"] = static_cast<std::int64_t>(references.size());
    outcome.counts["deltas_applied"] = static_cast<std::int64_t>(integration.applied.size());
    outcome.counts["deltas_rejected"] = static_cast<std::int64_t>(integration.rejected.size());
    outcome.counts["gateway_calls"] = static_cast<std::int64_t>(gateway.call_count());
    outcome.counts["live_calls"] =
        static_cast<std::int64_t>(live_observer != nullptr ? live_observer->call_count() : 0);

    nlohmann::json report;
    report["report_id"] = bundle.report_id;
    report["mode"] = std::string(gateway_mode_name(config.mode));
    report["counts"] = outcome.counts;
    report["gain"] = outcome.gain.to_json();
    report["warnings"] = outcome.warnings;
    report["timings_ms"] = nlohmann::json::object();
    for (const StageTiming& t : outcome.timings) report["timings_ms"][t.stage] = t.milliseconds;
    atomic_write(out / "run-report.json", dump_pretty(report));

    return outcome;
}

// ---------------------------------------------------------------------------
// Run statistics (report command)

namespace {

nlohmann::json load_artifact(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("missing artifact: " + path.string());
    }
    std::ifstream in(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid artifact " + path.string() + ": " + e.what());
    }
    return doc;
}

}  // namespace

nlohmann::json build_run_statistics(const std::filesystem::path& run_dir) {
    nlohmann::json questions_doc = load_artifact(run_dir / "questions.json");
    nlohmann::json answers_doc = load_artifact(run_dir / "answers.json");

    std::vector<QuestionPool> pools;
    for (const auto& pool_json : questions_doc.at("pools")) {
        QuestionPool pool;
        pool.image_id = pool_json.at("image_id").get<std::string>();
        for (const auto& q : pool_json.at("questions")) {
            pool.questions.push_back(question_from_json(q));
        }
        pools.push_back(std::move(pool));
    }

    nlohmann::json stats;
    stats["report_id"] = questions_doc.at("report_id");

    QuestionDistribution distribution = question_distribution(pools);
    stats["question_distribution"] = distribution.to_json();

    stats["monotonicity"] = nlohmann::json::array();
    for (const QuestionPool& pool : pools) {
        nlohmann::json row;
        row["image_id"] = pool.image_id;
        row["questions"] = pool.questions.size();
        if (pool.questions.size() >= 2) {
            row["monotonicity"] = pool_monotonicity(pool);
        } else {
            row["monotonicity"] = nullptr;
        }
        stats["monotonicity"].push_back(std::move(row));
    }

    std::vector<Answer> answers;
    for (const auto& a : answers_doc.at("answers")) answers.push_back(answer_from_json(a));
    stats["quality_by_round"] = nlohmann::json::array();
    for (const QualityDistributionRow& row : quality_distribution(answers)) {
        nlohmann::json r;
        r["round"] = row.round;
        r["total"] = row.total;
        r["positive_fraction"] = row.positive_fraction;
        for (const auto& [level, count] : row.counts) {
            r["counts"][std::string(quality_level_name(level))] = count;
        }
        stats["quality_by_round"].push_back(std::move(r));
    }

    AttackGraph text_graph = load_graph(run_dir / "graph.text.json");
    AttackGraph mm_graph = load_graph(run_dir / "graph.mm.json");
    stats["gain"] = diff_graphs(text_graph, mm_graph).to_json();
    return stats;
}

}  // namespace ctig
