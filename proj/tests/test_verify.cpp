#include "ctig/verify.hpp"

#include "doctest.h"
#include "support/test_support.hpp"

using namespace ctig;

namespace {

Question trend_question() {
    Question q;
    q.id = "q-img-chart-001";
    q.image_id = "img-chart";
    q.text = "What trend does the graph in this image reflect?";
    q.kind = QuestionKind::general;
    return q;
}

ThreatImage chart_image() {
    ThreatImage image;
    image.id = "img-chart";
    image.media_type = MediaType::png;
    image.image_type = ImageType::chart;
    image.bytes = "chartbytes";
    return image;
}

Answer round1(const std::string& text) {
    Answer a;
    a.question_id = "q-img-chart-001";
    a.text = text;
    a.round = 1;
    a.history.push_back({1, text, std::nullopt, std::nullopt});
    return a;
}

const ContextPair kContexts{"image ctx", "global ctx"};

}  // namespace

TEST_CASE("lexical failing check") {
    CHECK(lexical_failing_check("The source is unknown."));
    CHECK(lexical_failing_check("No details are visible."));
    CHECK(lexical_failing_check("The technique is NOT MENTIONED here."));
    CHECK_FALSE(lexical_failing_check("The malware injects into explorer.exe."));
}

TEST_CASE("assess_answer") {
    Question q = trend_question();
    ThreatImage image = chart_image();

    SUBCASE("hedged answers fail without any gateway call") {
        test::ScriptedGateway gateway;  // empty script: any call would throw
        QualityAssessment assessment =
            assess_answer(round1("The source is unknown."), q, image, gateway);
        CHECK(assessment.level == QualityLevel::failing);
        CHECK(gateway.call_count() == 0);
    }

    SUBCASE("level word is parsed from the reply") {
        test::ScriptedGateway gateway({"excellent"});
        QualityAssessment assessment =
            assess_answer(round1("C2 traffic rises sharply in May."), q, image, gateway);
        CHECK(assessment.level == QualityLevel::excellent);
        CHECK(gateway.call_count() == 1);
    }

    SUBCASE("unparseable output twice maps to satisfactory") {
        test::ScriptedGateway gateway({"mediocre", "mediocre"});
        std::vector<std::string> warnings;
        QualityAssessment assessment = assess_answer(
            round1("C2 traffic rises sharply in May."), q, image, gateway, {}, &warnings);
        CHECK(assessment.level == QualityLevel::satisfactory);
        CHECK(gateway.call_count() == 2);
        CHECK(warnings.size() == 3);  // two parse warnings + the fallback note
    }

    SUBCASE("optional dimension scoring") {
        VerifyOptions options;
        options.assess_dimensions = true;
        test::ScriptedGateway gateway(
            {"good", "accuracy: 4\nconsistency: 5\ncompleteness: 3\nrelevance: 4"});
        QualityAssessment assessment = assess_answer(
            round1("C2 traffic rises sharply in May."), q, image, gateway, options);
        CHECK(assessment.level == QualityLevel::good);
        REQUIRE(assessment.dimension_scores);
        CHECK(assessment.dimension_scores->at("accuracy") == 4);
        CHECK(assessment.dimension_scores->at("completeness") == 3);
    }
}

TEST_CASE("question filtering") {
    ThreatImage image = chart_image();

    SUBCASE("direct-correlation capture") {
        Question q;
        q.id = "q-1";
        q.image_id = "img-chart";
        q.text = "What is the functional role of the malicious script in this image?";
        test::ScriptedGateway gateway({"yes"});
        auto label = filter_question_direct(q, "graph summary", gateway);
        REQUIRE(label);
        CHECK(*label == FilterLabel::direct_correlation);
    }

    SUBCASE("negative direct answer defers") {
        Question q = trend_question();
        test::ScriptedGateway gateway({"no"});
        CHECK_FALSE(filter_question_direct(q, "graph summary", gateway));
    }

    SUBCASE("direct-stage gateway failure defers with a warning") {
        Question q = trend_question();
        test::ExplodingGateway gateway;
        std::vector<std::string> warnings;
        CHECK_FALSE(filter_question_direct(q, "graph summary", gateway, &warnings));
        CHECK(warnings.size() == 1);
    }

    SUBCASE("answer-oriented capture") {
        Question q = trend_question();
        test::ScriptedGateway yes({"yes, it names C2 traffic volume"});
        CHECK(filter_question_answer_oriented(q, round1("C2 traffic doubled."), yes) ==
              FilterLabel::answer_oriented);
        test::ScriptedGateway no({"no"});
        CHECK(filter_question_answer_oriented(q, round1("A decorative border."), no) ==
              FilterLabel::non_related);
    }

    SUBCASE("answer-oriented failure excludes conservatively") {
        Question q = trend_question();
        test::ExplodingGateway gateway;
        std::vector<std::string> warnings;
        CHECK(filter_question_answer_oriented(q, round1("C2 traffic doubled."), gateway,
                                              &warnings) == FilterLabel::non_related);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("refine_answer") {
    Question q = trend_question();
    ThreatImage image = chart_image();
    RefinementConfig config;

    auto assessed = [&](QualityLevel level) {
        Answer a = round1("The chart axis values are hard to read.");
        a.quality = QualityAssessment{level, std::nullopt, std::nullopt, std::nullopt};
        a.history.back().quality = a.quality;
        return a;
    };

    SUBCASE("failing then good stops at round 2 (A-Iteration)") {
        config.paradigm = Paradigm::a_iteration;
        test::ScriptedGateway gateway({
            "Name the actual traffic trend, not the styling.",  // optimization comment
            "The chart shows C2 beacon volume tripling after the dropper runs.",  // re-answer
            "good",                                                               // assessment
        });
        Answer refined = refine_answer(assessed(QualityLevel::failing), q, image, kContexts,
                                       config, gateway);
        CHECK(refined.round == 2);
        REQUIRE(refined.history.size() == 2);
        CHECK(refined.quality->level == QualityLevel::good);
        CHECK(refined.history[0].quality->level == QualityLevel::failing);
        CHECK(refined.history[0].quality->comment ==
              "Name the actual traffic trend, not the styling.");
        CHECK(refined.history[1].text ==
              "The chart shows C2 beacon volume tripling after the dropper runs.");
        CHECK_FALSE(refined.aborted);
        CHECK(gateway.remaining() == 0);
    }

    SUBCASE("failing then good stops at round 2 (Q-Led)") {
        config.paradigm = Paradigm::q_led;
        test::ScriptedGateway gateway({
            "Look at the y-axis counts and the burst after week 3.",  // suggestion
            "The chart shows infection counts spiking in week 4.",    // re-answer
            "excellent",
        });
        Answer refined = refine_answer(assessed(QualityLevel::failing), q, image, kContexts,
                                       config, gateway);
        CHECK(refined.round == 2);
        CHECK(refined.quality->level == QualityLevel::excellent);
        REQUIRE(refined.history.size() == 2);
        CHECK(refined.history[1].suggestion ==
              "Look at the y-axis counts and the burst after week 3.");
    }

    SUBCASE("always failing stops at max_rounds with level failing") {
        config.max_rounds = 4;
        std::vector<std::string> script;
        for (int round = 2; round <= 4; ++round) {
            script.push_back("comment " + std::to_string(round));
            script.push_back("Answer attempt " + std::to_string(round) + " still hedges obscurely.");
            script.push_back("failing");
        }
        test::ScriptedGateway gateway(script);
        Answer refined = refine_answer(assessed(QualityLevel::failing), q, image, kContexts,
                                       config, gateway);
        CHECK(refined.round == 4);
        CHECK(refined.history.size() == 4);
        CHECK(refined.quality->level == QualityLevel::failing);
        CHECK(gateway.remaining() == 0);
    }

    SUBCASE("already accepted answers are a caller error") {
        test::ScriptedGateway gateway;
        CHECK_THROWS_AS(refine_answer(assessed(QualityLevel::good), q, image, kContexts, config,
                                      gateway),
                        VerifyError);
    }

    SUBCASE("gateway failure aborts with best-so-far") {
        test::ScriptedGateway gateway({"comment"});  // re-answer call will throw
        Answer refined = refine_answer(assessed(QualityLevel::failing), q, image, kContexts,
                                       config, gateway);
        CHECK(refined.aborted);
        CHECK(refined.round == 1);
        CHECK(refined.quality->level == QualityLevel::failing);
    }
}

TEST_CASE("quality_distribution") {
    auto with_history = [](std::vector<QualityLevel> levels) {
        Answer a;
        a.question_id = "q";
        for (std::size_t i = 0; i < levels.size(); ++i) {
            AnswerRound r;
            r.round = static_cast<int>(i + 1);
            r.text = "t";
            r.quality = QualityAssessment{levels[i], std::nullopt, std::nullopt, std::nullopt};
            a.history.push_back(std::move(r));
        }
        a.round = static_cast<int>(levels.size());
        return a;
    };

    SUBCASE("three good and one failing at round 1") {
        std::vector<Answer> answers = {
            with_history({QualityLevel::good}), with_history({QualityLevel::good}),
            with_history({QualityLevel::good}), with_history({QualityLevel::failing})};
        auto rows = quality_distribution(answers);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].round == 1);
        CHECK(rows[0].total == 4);
        CHECK(rows[0].positive_fraction == doctest::Approx(0.75));
    }

    SUBCASE("multi-round answers are tracked per round") {
        std::vector<Answer> answers = {
            with_history({QualityLevel::failing, QualityLevel::good}),
            with_history({QualityLevel::excellent}),
        };
        auto rows = quality_distribution(answers);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].total == 2);
        CHECK(rows[0].positive_fraction == doctest::Approx(0.5));
        CHECK(rows[1].total == 1);
        CHECK(rows[1].positive_fraction == doctest::Approx(1.0));
    }

    SUBCASE("empty input gives an empty table") {
        CHECK(quality_distribution({}).empty());
    }

    SUBCASE("all excellent gives fraction 1") {
        std::vector<Answer> answers = {with_history({QualityLevel::excellent}),
                                       with_history({QualityLevel::excellent})};
        auto rows = quality_distribution(answers);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].positive_fraction == doctest::Approx(1.0));
    }
}
