#include "ctig/text_util.hpp"

#include "doctest.h"

using namespace ctig;

TEST_CASE("normalization rules") {
    CHECK(normalize_name("  Stuxnet   Worm ") == "stuxnet worm");
    CHECK(normalize_name("STUXNET") == "stuxnet");
    CHECK(normalize_lookup("OS Credential-Dumping!") == "os credential dumping");
    CHECK(normalize_question("What is the main content of the image?") ==
          "what is the main content of the image");
    CHECK(normalize_question("A question??  ") == "a question");
}

TEST_CASE("paragraph splitting on blank lines") {
    std::string text = "first line\nstill first\n\n\nsecond\n\nthird\n";
    auto paragraphs = split_paragraphs(text);
    REQUIRE(paragraphs.size() == 3);
    CHECK(paragraphs[0] == "first line\nstill first");
    CHECK(paragraphs[1] == "second");
    CHECK(paragraphs[2] == "third");
    CHECK(split_paragraphs("").empty());
    CHECK(split_paragraphs("\n \n\t\n").empty());
}

TEST_CASE("token jaccard") {
    CHECK(token_jaccard("alpha beta", "alpha beta") == doctest::Approx(1.0));
    CHECK(token_jaccard("alpha beta", "gamma delta") == doctest::Approx(0.0));
    // {a, b, c} vs {b, c, d}: intersection 2, union 4.
    CHECK(token_jaccard("a b c", "b c d") == doctest::Approx(0.5));
    // Case and punctuation do not matter.
    CHECK(token_jaccard("Process Injection", "process-injection!") == doctest::Approx(1.0));
}

TEST_CASE("contains_ci") {
    CHECK(contains_ci("The source is UNKNOWN.", "unknown"));
    CHECK_FALSE(contains_ci("all clear", "unknown"));
}
