#include "ctig/brainstorm.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "support/test_support.hpp"

using namespace ctig;

namespace {

ThreatImage classified_image(ImageType type = ImageType::attack_flow) {
    ThreatImage image;
    image.id = "img-flow";
    image.media_type = MediaType::png;
    image.image_type = type;
    image.bytes = "fakepngbytes";
    return image;
}

LeadingQuestionBank fixture_bank() {
    return LeadingQuestionBank::load(test::source_dir() / "data/leading_questions.json");
}

const ContextPair kContexts{"image context", "global context"};

}  // namespace

TEST_CASE("bank loads and validates the seven types") {
    LeadingQuestionBank bank = fixture_bank();
    for (ImageType t : kAllImageTypes) {
        CHECK(!bank.for_type(t).empty());
    }
    CHECK(bank.for_type(ImageType::attack_flow).size() == 5);

    std::map<ImageType, std::vector<std::string>> partial;
    partial[ImageType::attack_flow] = {"What is the main content of the image?"};
    CHECK_THROWS_AS(LeadingQuestionBank::from_map(partial), BrainstormError);
}

TEST_CASE("general question generation") {
    LeadingQuestionBank bank = fixture_bank();
    ThreatImage image = classified_image();

    SUBCASE("five lines give five questions") {
        test::ScriptedGateway gateway({
            "What is the encryption scheme of the channel in the image?\n"
            "What are the lateral movement steps in the image?\n"
            "What is the role of the USB drive in the image?\n"
            "What are the network zones of the diagram in the image?\n"
            "What is the final target of the flow in the image?\n"});
        auto questions = generate_general_questions(image, bank, kContexts, gateway);
        REQUIRE(questions.size() == 5);
        CHECK(questions[0].kind == QuestionKind::general);
        CHECK(questions[0].image_id == "img-flow");
    }

    SUBCASE("seed duplicates and non-questions are dropped") {
        test::ScriptedGateway gateway({
            "What is the main content of the image?\n"   // verbatim seed
            "- What is the role of the USB drive in the image?\n"
            "This line is not a question\n"
            "2. What are the network zones of the diagram in the image?\n"});
        auto questions = generate_general_questions(image, bank, kContexts, gateway);
        REQUIRE(questions.size() == 2);
        CHECK(questions[0].text == "What is the role of the USB drive in the image?");
        CHECK(questions[1].text == "What are the network zones of the diagram in the image?");
    }

    SUBCASE("empty output is an empty list plus warning") {
        test::ScriptedGateway gateway({""});
        std::vector<std::string> warnings;
        auto questions = generate_general_questions(image, bank, kContexts, gateway, &warnings);
        CHECK(questions.empty());
        CHECK(warnings.size() == 1);
    }

    SUBCASE("unclassified image is a precondition error") {
        ThreatImage raw = classified_image();
        raw.image_type.reset();
        test::ScriptedGateway gateway({"x?"});
        CHECK_THROWS_AS(generate_general_questions(raw, bank, kContexts, gateway),
                        BrainstormError);
    }
}

TEST_CASE("task question generation") {
    ThreatImage image = classified_image();

    SUBCASE("lines become task questions") {
        test::ScriptedGateway gateway({
            "What are the temporal features exhibited by the attack flow graph?\n"
            "What missing steps between install and contact does the image show?\n"
            "What techniques of the lateral movement stage are in the image?\n"});
        auto questions =
            generate_task_questions(image, "Stuxnet --install--> dropper", kContexts, gateway);
        REQUIRE(questions.size() == 3);
        CHECK(questions[0].kind == QuestionKind::task_specific);
        CHECK(questions[0].text ==
              "What are the temporal features exhibited by the attack flow graph?");
    }

    SUBCASE("missing graph summary is a precondition error") {
        test::ScriptedGateway gateway({"x?"});
        CHECK_THROWS_AS(generate_task_questions(image, "", kContexts, gateway), BrainstormError);
    }
}

TEST_CASE("build_pool dedup, ids, and cap") {
    auto q = [](const std::string& text, QuestionKind kind) {
        Question question;
        question.image_id = "img-flow";
        question.text = text;
        question.kind = kind;
        return question;
    };

    SUBCASE("12 general + 9 task with no overlap gives 21") {
        std::vector<Question> general, task;
        for (int i = 0; i < 12; ++i) {
            general.push_back(q("What is the general aspect " + std::to_string(i) +
                                    " of the image?",
                                QuestionKind::general));
        }
        for (int i = 0; i < 9; ++i) {
            task.push_back(q("What is the task aspect " + std::to_string(i) + " of the image?",
                             QuestionKind::task_specific));
        }
        QuestionPool pool = build_pool(general, task);
        CHECK(pool.questions.size() == 21);
        CHECK(pool.questions[0].id == "q-img-flow-001");
        CHECK(pool.questions[20].id == "q-img-flow-021");
    }

    SUBCASE("identical question in both lists is kept once") {
        QuestionPool pool = build_pool({q("What is the main content of the image?",
                                          QuestionKind::general)},
                                       {q("what is the MAIN content of the image", // case/punct
                                          QuestionKind::task_specific)});
        CHECK(pool.questions.size() == 1);
        CHECK(pool.questions[0].kind == QuestionKind::general);
    }

    SUBCASE("empty inputs give an empty pool") {
        QuestionPool pool = build_pool({}, {});
        CHECK(pool.questions.empty());
    }

    SUBCASE("cap bounds the pool") {
        std::vector<Question> many;
        for (int i = 0; i < 60; ++i) {
            many.push_back(q("What is aspect " + std::to_string(i) + " of the image?",
                             QuestionKind::general));
        }
        CHECK(build_pool(many, {}, 40).questions.size() == 40);
    }

    SUBCASE("mixed image ids are rejected") {
        Question other = q("What is the other thing in the image?", QuestionKind::general);
        other.image_id = "img-table";
        CHECK_THROWS_AS(
            build_pool({q("What is the main content of the image?", QuestionKind::general)},
                       {other}),
            BrainstormError);
    }
}

TEST_CASE("pool monotonicity") {
    auto pool_of = [](std::vector<std::string> texts) {
        QuestionPool pool;
        pool.image_id = "img";
        for (std::size_t i = 0; i < texts.size(); ++i) {
            Question q;
            q.id = "q-img-" + std::to_string(i);
            q.image_id = "img";
            q.text = texts[i];
            pool.questions.push_back(std::move(q));
        }
        return pool;
    };

    SUBCASE("identical questions score 1") {
        CHECK(pool_monotonicity(pool_of({"What is the main content of the image?",
                                         "What is the main content of the image?"})) ==
              doctest::Approx(1.0));
    }

    SUBCASE("token-disjoint questions score 0") {
        CHECK(pool_monotonicity(pool_of({"alpha beta gamma", "delta epsilon zeta"})) ==
              doctest::Approx(0.0));
    }

    SUBCASE("hand-enumerated Jaccard for the two seed questions") {
        // "what is the main content of the image" tokens:
        //   {what, is, the, main, content, of, image}          (7)
        // "what are the possible uses of the image" tokens:
        //   {what, are, the, possible, uses, of, image}        (7)
        // intersection {what, the, of, image} = 4, union = 10.
        double expected = 4.0 / 10.0;
        CHECK(pool_monotonicity(pool_of({"What is the main content of the image?",
                                         "What are the possible uses of the image?"})) ==
              doctest::Approx(expected));
    }

    SUBCASE("single-question pool is undefined") {
        CHECK_THROWS_AS(pool_monotonicity(pool_of({"only one"})), BrainstormError);
    }

    SUBCASE("bounds and permutation invariance over random pools") {
        std::mt19937 rng(99);
        static const char* vocabulary[] = {"what", "image", "flow", "attack", "path",
                                           "table", "code",  "uses", "trend",  "target"};
        for (int trial = 0; trial < 100; ++trial) {
            std::uniform_int_distribution<int> pool_size(2, 8), word_count(1, 6), word(0, 9);
            std::vector<std::string> texts;
            for (int i = 0; i < pool_size(rng); ++i) {
                std::string text;
                for (int w = 0; w < word_count(rng); ++w) {
                    text += std::string(vocabulary[word(rng)]) + " ";
                }
                texts.push_back(text + "?");
            }
            double value = mean_pairwise_similarity(texts);
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
            std::vector<std::string> shuffled = texts;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            CHECK(mean_pairwise_similarity(shuffled) == doctest::Approx(value));
        }
    }
}
