#include "ctig/evaluate.hpp"

#include "doctest.h"
#include "support/generators.hpp"
#include "support/test_support.hpp"

using namespace ctig;
using test::make_entity;
using test::make_event;

namespace {

GoldAnnotation fixture_gold() {
    return GoldAnnotation::load(test::fixture_dir() / "bundle-stuxnet/gold.json");
}

QuestionPool labeled_pool(const std::string& image_id, int direct, int answer_oriented,
                          int non_related) {
    QuestionPool pool;
    pool.image_id = image_id;
    int index = 0;
    auto add = [&](FilterLabel label, int count) {
        for (int i = 0; i < count; ++i) {
            Question q;
            q.id = "q-" + image_id + "-" + std::to_string(++index);
            q.image_id = image_id;
            q.text = "What is aspect " + std::to_string(index) + " of the image?";
            q.filter_label = label;
            pool.questions.push_back(std::move(q));
        }
    };
    add(FilterLabel::direct_correlation, direct);
    add(FilterLabel::answer_oriented, answer_oriented);
    add(FilterLabel::non_related, non_related);
    return pool;
}

}  // namespace

TEST_CASE("gold annotation loads") {
    GoldAnnotation gold = fixture_gold();
    CHECK(gold.entities.size() == 5);
    CHECK(gold.relations.size() == 4);
    CHECK(gold.techniques.size() == 6);
}

TEST_CASE("match_entities") {
    MatchConfig cfg;

    SUBCASE("normalization matches case-insensitively") {
        auto matching = match_entities({"Stuxnet"}, {"stuxnet"}, cfg);
        REQUIRE(matching.size() == 1);
        CHECK(matching[0].first == "Stuxnet");
    }

    SUBCASE("fuzzy boundary at the threshold") {
        // "stuxnet worm" vs "stuxnet": token sets {stuxnet, worm} vs {stuxnet},
        // Jaccard = 1/2, below the 0.85 default.
        CHECK(match_entities({"Stuxnet worm"}, {"Stuxnet"}, cfg).empty());
        MatchConfig loose;
        loose.fuzzy_threshold = 0.5;
        CHECK(match_entities({"Stuxnet worm"}, {"Stuxnet"}, loose).size() == 1);
    }

    SUBCASE("disjoint sets match nothing") {
        CHECK(match_entities({"alpha"}, {"omega"}, cfg).empty());
    }

    SUBCASE("matching is injective") {
        auto matching = match_entities({"server", "server backup"}, {"server"}, cfg);
        CHECK(matching.size() == 1);
    }
}

TEST_CASE("score on a hand-enumerated fixture") {
    // gold: 4 entities; pred: 5 entities of which 3 match.
    GoldAnnotation gold;
    gold.entities = {{"Stuxnet", "malware"},
                     {"dropper", "file"},
                     {"C&C server", "infrastructure"},
                     {"PLC", "infrastructure"}};

    AttackGraph pred;
    pred.report_id = "metrics";
    pred.entities = {
        make_entity("e1", "Stuxnet", "malware"),
        make_entity("e2", "dropper", "file"),
        make_entity("e3", "C&C server", "infrastructure"),
        make_entity("e4", "registry key", "file"),   // fp
        make_entity("e5", "USB stick", "tool"),      // fp
    };

    MetricReport report = score(pred, gold, MatchConfig{});
    // tp=3, fp=2, fn=1 -> P=0.6, R=0.75, F1=2*0.45/1.35.
    CHECK(report.entity.tp == 3);
    CHECK(report.entity.precision == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(report.entity.recall == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(report.entity.f1 == doctest::Approx(2.0 * 0.6 * 0.75 / 1.35).epsilon(1e-9));
}

TEST_CASE("score identity and empty-prediction edges") {
    GoldAnnotation gold = fixture_gold();

    SUBCASE("prediction equal to gold scores 1.0 everywhere") {
        AttackGraph pred;
        pred.report_id = "stuxnet-demo";
        pred.entities = {
            make_entity("stuxnet", "Stuxnet", "malware"),
            make_entity("dropper", "dropper", "file"),
            make_entity("workstation", "engineering workstation", "infrastructure"),
            make_entity("cc-server", "C&C server", "infrastructure"),
            make_entity("lnk", ".LNK file", "file"),
        };
        pred.events = {
            make_event("stuxnet", "spread to", "workstation", 0, {"T1091"}),
            make_event("stuxnet", "install", "dropper", 1, {"T1574", "T1003", "T1107"}),
            make_event("stuxnet", "communicate with", "cc-server", 2, {"T1573", "T1546"}),
            make_event("dropper", "write", "lnk", 3),
        };
        MetricReport report = score(pred, gold, MatchConfig{});
        CHECK(report.entity.f1 == doctest::Approx(1.0));
        CHECK(report.relation.f1 == doctest::Approx(1.0));
        CHECK(report.technique.f1 == doctest::Approx(1.0));
    }

    SUBCASE("empty prediction scores 0.0 with the 0/0 convention") {
        AttackGraph pred;
        pred.report_id = "stuxnet-demo";
        MetricReport report = score(pred, gold, MatchConfig{});
        CHECK(report.entity.precision == 0.0);
        CHECK(report.entity.recall == 0.0);
        CHECK(report.entity.f1 == 0.0);
        CHECK(report.relation.f1 == 0.0);
        CHECK(report.technique.f1 == 0.0);
    }
}

TEST_CASE("relation scoring requires endpoint matches") {
    GoldAnnotation gold;
    gold.entities = {{"alpha", "malware"}, {"beta", "file"}};
    gold.relations = {{"alpha", "install", "beta"}};

    AttackGraph pred;
    pred.report_id = "r";
    pred.entities = {make_entity("a", "alpha", "malware"), make_entity("x", "gamma", "file")};
    pred.events = {make_event("a", "install", "x", 1)};

    MetricReport report = score(pred, gold, MatchConfig{});
    // gamma never matches beta, so the relation cannot score even though
    // the label matches.
    CHECK(report.relation.tp == 0);
    CHECK(report.relation.fp == 1);
    CHECK(report.relation.fn == 1);
}

TEST_CASE("technique scoring is exact-id") {
    GoldAnnotation gold;
    gold.techniques = {"T1204"};
    AttackGraph pred;
    pred.report_id = "r";
    pred.entities = {make_entity("a", "alpha", "malware"), make_entity("b", "beta", "file")};
    pred.events = {make_event("a", "run", "b", 1, {"T1204.002"})};
    MetricReport report = score(pred, gold, MatchConfig{});
    CHECK(report.technique.tp == 0);  // sub-technique does not match the parent
    CHECK(report.technique.fp == 1);
    CHECK(report.technique.fn == 1);
}

TEST_CASE("swapping prediction and gold swaps precision and recall") {
    test::GraphGenerator gen(4242);
    for (int trial = 0; trial < 25; ++trial) {
        AttackGraph a = gen.graph();
        AttackGraph b = gen.graph();
        b.report_id = a.report_id;

        auto as_gold = [](const AttackGraph& g) {
            GoldAnnotation gold;
            for (const Entity& e : g.entities) gold.entities.emplace_back(e.name, e.entity_type);
            for (const AtomicEvent& ev : g.events) {
                gold.relations.push_back({g.find_entity(ev.subject)->name, ev.action,
                                          g.find_entity(ev.object)->name});
                for (const std::string& t : ev.techniques) gold.techniques.push_back(t);
            }
            for (const SupplementaryRelation& r : g.supplementary) {
                gold.relations.push_back({g.find_entity(r.subject)->name, r.relation,
                                          g.find_entity(r.object)->name});
            }
            return gold;
        };

        MetricReport ab = score(a, as_gold(b), MatchConfig{});
        MetricReport ba = score(b, as_gold(a), MatchConfig{});
        CHECK(ab.entity.precision == doctest::Approx(ba.entity.recall));
        CHECK(ab.entity.recall == doctest::Approx(ba.entity.precision));
        CHECK(ab.entity.f1 == doctest::Approx(ba.entity.f1));
        CHECK(ab.technique.precision == doctest::Approx(ba.technique.recall));
        CHECK(ab.technique.recall == doctest::Approx(ba.technique.precision));
    }
}

TEST_CASE("metrics stay within bounds") {
    test::GraphGenerator gen(1717);
    for (int trial = 0; trial < 25; ++trial) {
        AttackGraph pred = gen.graph();
        GoldAnnotation gold;
        AttackGraph source = gen.graph();
        for (const Entity& e : source.entities) gold.entities.emplace_back(e.name, e.entity_type);
        MetricReport report = score(pred, gold, MatchConfig{});
        for (const CategoryMetrics* m :
             {&report.entity, &report.relation, &report.technique}) {
            CHECK(m->precision >= 0.0);
            CHECK(m->precision <= 1.0);
            CHECK(m->recall >= 0.0);
            CHECK(m->recall <= 1.0);
            CHECK(m->f1 <= std::max(m->precision, m->recall) + 1e-12);
            if (m->f1 == 0.0) CHECK((m->precision == 0.0 || m->recall == 0.0));
        }
        CHECK(report.entity.tp <= std::min(pred.entities.size(), gold.entities.size()));
    }
}

TEST_CASE("question_distribution") {
    SUBCASE("the published label counts reproduce the published proportions") {
        std::vector<QuestionPool> pools = {labeled_pool("img-a", 602, 536, 143)};
        QuestionDistribution dist = question_distribution(pools);
        CHECK(dist.total == 1281);
        CHECK(dist.proportions[FilterLabel::direct_correlation] ==
              doctest::Approx(0.4699).epsilon(1e-4));
        CHECK(dist.proportions[FilterLabel::answer_oriented] ==
              doctest::Approx(0.4185).epsilon(1e-4));
        CHECK(dist.proportions[FilterLabel::non_related] ==
              doctest::Approx(0.1116).epsilon(1e-4));
        double sum = dist.proportions[FilterLabel::direct_correlation] +
                     dist.proportions[FilterLabel::answer_oriented] +
                     dist.proportions[FilterLabel::non_related];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("single direct question") {
        QuestionDistribution dist = question_distribution({labeled_pool("img-a", 1, 0, 0)});
        CHECK(dist.proportions[FilterLabel::direct_correlation] == doctest::Approx(1.0));
        CHECK(dist.proportions[FilterLabel::answer_oriented] == doctest::Approx(0.0));
    }

    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(question_distribution({}), EvaluateError);
    }

    SUBCASE("unlabeled question is an error") {
        QuestionPool pool = labeled_pool("img-a", 1, 0, 0);
        pool.questions[0].filter_label.reset();
        CHECK_THROWS_AS(question_distribution({pool}), EvaluateError);
    }
}

TEST_CASE("gain_report delegates to diff_graphs") {
    AttackGraph text = test::stuxnet_graph();
    AttackGraph mm = text;
    mm.events[0].techniques.push_back("T1003");
    GainReport gain = gain_report(text, mm);
    CHECK(gain.technique_count() == 1);
    CHECK(gain.added_techniques[0] == "T1003");
}
