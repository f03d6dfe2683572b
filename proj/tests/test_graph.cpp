#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "stkgqa/graph.hpp"
#include "stkgqa/rng.hpp"
#include "support/oracles.hpp"

using namespace stkgqa;

namespace {

KnowledgeGraph graph_from(const std::string& tsv) {
    std::istringstream in(tsv);
    return KnowledgeGraph::load(in);
}

// Random sparse graph over `n` entities; used against the BFS oracle.
std::vector<Fact> random_facts(Rng& rng, size_t n, size_t m) {
    std::vector<Fact> facts;
    for (size_t i = 0; i < m; ++i) {
        Fact f;
        f.subject = "E" + std::to_string(rng.next_below(n));
        f.relation = "r" + std::to_string(rng.next_below(5));
        f.object = "E" + std::to_string(rng.next_below(n));
        if (rng.next_below(2) == 0) {
            int start = 1800 + static_cast<int>(rng.next_below(200));
            f.interval = TimeInterval{start, start + static_cast<int>(rng.next_below(30))};
        }
        if (rng.next_below(2) == 0)
            f.location = GeoPoint{rng.next_double() * 100 - 50, rng.next_double() * 100 - 50};
        facts.push_back(std::move(f));
    }
    return facts;
}

}  // namespace

TEST_CASE("parse_fact_line handles full, empty, and bad annotations") {
    Fact f = parse_fact_line(
        "Albert_Einstein\tworksAt\tHumboldt_University_of_Berlin\t1914\t1917\t52.52\t13.39", 1);
    CHECK(f.subject == "Albert_Einstein");
    REQUIRE(f.interval.has_value());
    CHECK(f.interval->start == 1914);
    CHECK(f.interval->end == 1917);
    REQUIRE(f.location.has_value());
    CHECK(f.location->lat == doctest::Approx(52.52));
    CHECK(f.location->lon == doctest::Approx(13.39));

    Fact bare = parse_fact_line("A\tr\tB\t\t\t\t", 2);
    CHECK_FALSE(bare.interval.has_value());
    CHECK_FALSE(bare.location.has_value());

    CHECK_THROWS_AS(parse_fact_line("A\tr\tB\t1920\t1910\t\t", 3), ParseError);
    CHECK_THROWS_AS(parse_fact_line("A\tr\tB\t19x0\t1990\t\t", 4), ParseError);
    CHECK_THROWS_AS(parse_fact_line("A\tr\tB\t\t\t95.0\t10.0", 5), ParseError);
    CHECK_THROWS_AS(parse_fact_line("A\tr\tB\t1920\t\t\t", 6), ParseError);
    CHECK_THROWS_AS(parse_fact_line("A\tr\tB", 7), ParseError);
    CHECK_THROWS_AS(parse_fact_line("A\tr\tB\t0\t5000\t\t", 8), ParseError);
}

TEST_CASE("load builds consistent indexes and dedups") {
    KnowledgeGraph g = graph_from(
        "# comment line\n"
        "A\tr1\tB\t1900\t1910\t10.0\t20.0\n"
        "B\tr2\tC\t\t\t\t\n"
        "A\tr1\tB\t1900\t1910\t10.0\t20.0\n"
        "C\tr1\tA\t1950\t1960\t\t\n");
    CHECK(g.facts().size() == 3);
    CHECK(g.duplicates_dropped() == 1);
    CHECK(g.by_subject("A").size() == 1);
    CHECK(g.by_object("B").size() == 1);
    CHECK(g.by_relation("r1").size() == 2);
    CHECK(g.entities().size() == 3);

    // Index consistency: every fact is reachable from exactly its own keys.
    for (size_t i = 0; i < g.facts().size(); ++i) {
        const Fact& f = g.facts()[i];
        auto contains = [](const std::vector<size_t>& v, size_t x) {
            return std::find(v.begin(), v.end(), x) != v.end();
        };
        CHECK(contains(g.by_subject(f.subject), i));
        CHECK(contains(g.by_object(f.object), i));
        CHECK(contains(g.by_relation(f.relation), i));
        for (const auto& e : g.entities()) {
            if (e != f.subject) CHECK_FALSE(contains(g.by_subject(e), i));
            if (e != f.object) CHECK_FALSE(contains(g.by_object(e), i));
        }
    }
}

TEST_CASE("entity coords come from the first located object fact") {
    KnowledgeGraph g = graph_from(
        "A\tr\tB\t\t\t10.0\t20.0\n"
        "C\tr\tB\t\t\t30.0\t40.0\n");
    auto coords = g.entity_coords("B");
    REQUIRE(coords.has_value());
    CHECK(coords->lat == doctest::Approx(10.0));
    CHECK_FALSE(g.entity_coords("A").has_value());
}

TEST_CASE("profile reports absent components") {
    KnowledgeGraph g = graph_from(
        "Einstein\tlivesIn\tMunich\t1880\t1894\t48.14\t11.58\n"
        "Einstein\tknows\tBesso\t\t\t\t\n");
    EntityProfile munich = g.spatiotemporal_profile("Munich");
    REQUIRE(munich.location.has_value());
    CHECK(munich.location->lat == doctest::Approx(48.14));
    REQUIRE(munich.interval.has_value());

    EntityProfile besso = g.spatiotemporal_profile("Besso");
    CHECK_FALSE(besso.interval.has_value());
    CHECK_FALSE(besso.location.has_value());

    // Subject never annotated as object: interval falls back to subject-side.
    EntityProfile einstein = g.spatiotemporal_profile("Einstein");
    REQUIRE(einstein.interval.has_value());
    CHECK_FALSE(einstein.location.has_value());

    CHECK_THROWS_AS(g.spatiotemporal_profile("Nobody"), std::invalid_argument);
}

TEST_CASE("subgraph_within_hops on a chain") {
    KnowledgeGraph g = graph_from(
        "A\tr\tB\t\t\t\t\n"
        "B\tr\tC\t\t\t\t\n"
        "C\tr\tD\t\t\t\t\n");
    auto one = g.subgraph_within_hops("A", 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].object == "B");

    auto two = g.subgraph_within_hops("A", 2);
    REQUIRE(two.size() == 2);
    CHECK(two[1].subject == "B");

    CHECK_THROWS_AS(g.subgraph_within_hops("Z", 1), std::invalid_argument);
    CHECK_THROWS_AS(g.subgraph_within_hops("A", 0), std::invalid_argument);
}

TEST_CASE("subgraph_within_hops equals BFS oracle and is monotone in hops") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        auto facts = random_facts(rng, 50, 100);
        KnowledgeGraph g = KnowledgeGraph::from_facts(facts);
        const std::string center = g.facts()[rng.next_below(g.facts().size())].subject;
        std::vector<Fact> prev;
        for (int hops = 1; hops <= 3; ++hops) {
            auto got = g.subgraph_within_hops(center, hops);
            auto expect = oracle::bfs_subgraph(g.facts(), center, hops);
            CHECK(got == expect);
            // Monotonicity: result at k is a subset of the result at k+1.
            for (const auto& f : prev)
                CHECK(std::find(got.begin(), got.end(), f) != got.end());
            prev = std::move(got);
        }
    }
}

TEST_CASE("complete_fact_locations fills from object coords and is idempotent") {
    KnowledgeGraph g = graph_from(
        "X\tlocatedIn\tHumboldt\t\t\t52.52\t13.39\n"
        "Einstein\tworksAt\tHumboldt\t1914\t1917\t\t\n"
        "Einstein\tlivesIn\tNowhere\t1900\t1905\t\t\n"
        "A\tr\tB\t\t\t10.0\t20.0\n");
    KnowledgeGraph c = g.complete_fact_locations();
    REQUIRE(c.facts()[1].location.has_value());
    CHECK(c.facts()[1].location->lat == doctest::Approx(52.52));
    CHECK_FALSE(c.facts()[2].location.has_value());  // Nowhere has no coords
    CHECK(c.facts()[3].location->lat == doctest::Approx(10.0));

    KnowledgeGraph cc = c.complete_fact_locations();
    CHECK(cc.facts() == c.facts());
}

TEST_CASE("serialization round trips modulo dedup") {
    const std::string tsv =
        "A\tr1\tB\t1900\t1910\t10.25\t-20.5\n"
        "B\tr2\tC\t\t\t\t\n"
        "C\tr1\tA\t1950\t1960\t\t\n";
    KnowledgeGraph g = graph_from(tsv);
    std::ostringstream out;
    g.write_tsv(out);
    CHECK(out.str() == tsv);
}

TEST_CASE("stats match an independent recount of a synthetic file") {
    Rng rng(202);
    auto facts = random_facts(rng, 120, 2000);
    KnowledgeGraph g = KnowledgeGraph::from_facts(facts);

    std::ostringstream out;
    g.write_tsv(out);
    const std::string text = out.str();

    // Independent recount straight off the serialized text.
    size_t lines = 0, with_interval = 0, with_location = 0, both = 0;
    std::set<std::string> ents, rels;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++lines;
        std::vector<std::string> f;
        size_t pos = 0;
        while (true) {
            size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                f.push_back(line.substr(pos));
                break;
            }
            f.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        REQUIRE(f.size() == 7);
        ents.insert(f[0]);
        ents.insert(f[2]);
        rels.insert(f[1]);
        bool t = !f[3].empty(), l = !f[5].empty();
        with_interval += t;
        with_location += l;
        both += t && l;
    }

    GraphStats s = g.stats();
    CHECK(s.facts == lines);
    CHECK(s.facts_with_interval == with_interval);
    CHECK(s.facts_with_location == with_location);
    CHECK(s.facts_fully_annotated == both);
    CHECK(s.entities == ents.size());
    CHECK(s.relations == rels.size());
    CHECK(s.span_min >= 1800);
    CHECK(s.span_max <= 2060);
}

TEST_CASE("strip_annotations removes the requested components") {
    KnowledgeGraph g = graph_from("A\tr\tB\t1900\t1910\t10.0\t20.0\n");
    KnowledgeGraph no_t = g.strip_annotations(true, false);
    CHECK_FALSE(no_t.facts()[0].interval.has_value());
    CHECK(no_t.facts()[0].location.has_value());
    KnowledgeGraph none = g.strip_annotations(true, true);
    CHECK_FALSE(none.facts()[0].location.has_value());
}
