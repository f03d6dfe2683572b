#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "stkgqa/filter.hpp"
#include "stkgqa/rng.hpp"
#include "support/filter_oracle.hpp"

using namespace stkgqa;

namespace {

// Candidate profiles are defined by object-side facts.
KnowledgeGraph candidate_graph() {
    std::istringstream in(
        "Einstein\tworksAt\tHumboldt\t1914\t1917\t52.52\t13.39\n"
        "Einstein\tworksAt\tX\t1870\t1875\t52.5\t13.4\n"
        "Einstein\tworksAt\tY\t1920\t1925\t40.0\t-5.0\n"
        "Einstein\tknows\tBare\t\t\t\t\n");
    return KnowledgeGraph::load(in);
}

ScoredCandidates candidates(std::initializer_list<const char*> ids) {
    ScoredCandidates out;
    double p = 0.5;
    for (const char* id : ids) {
        out.push_back({id, p});
        p *= 0.5;
    }
    return out;
}

}  // namespace

TEST_CASE("after-constraint keeps and drops per candidate profile") {
    KnowledgeGraph g = candidate_graph();
    TemporalConstraint after{TemporalKind::After, {1880, 1894}, "clue"};
    auto report = filter_candidates(candidates({"Humboldt", "X"}), {after}, g);
    REQUIRE(report.kept.size() == 1);
    CHECK(report.kept[0].id == "Humboldt");
    REQUIRE(report.dropped.size() == 1);
    CHECK(report.dropped[0].first == "X");
    CHECK(report.unevaluable.empty());
}

TEST_CASE("empty constraint list keeps everything in order") {
    KnowledgeGraph g = candidate_graph();
    auto input = candidates({"Y", "Humboldt", "X"});
    auto report = filter_candidates(input, {}, g);
    REQUIRE(report.kept.size() == 3);
    for (size_t i = 0; i < input.size(); ++i) CHECK(report.kept[i].id == input[i].id);
}

TEST_CASE("all candidates failing a direction constraint empties kept") {
    KnowledgeGraph g = candidate_graph();
    SpatialConstraint north;
    north.kind = SpatialKind::Direction;
    north.direction = Direction::N;
    north.cluePoint = {89.0, 0.0};
    auto report = filter_candidates(candidates({"Humboldt", "X", "Y"}), {north}, g);
    CHECK(report.kept.empty());
    CHECK(report.dropped.size() == 3);
    for (const auto& [id, c] : report.dropped)
        CHECK(std::get<SpatialConstraint>(c).direction == Direction::N);
}

TEST_CASE("missing annotations are reported as unevaluable") {
    KnowledgeGraph g = candidate_graph();
    TemporalConstraint after{TemporalKind::After, {1800, 1850}, "clue"};
    auto report = filter_candidates(candidates({"Humboldt", "Bare"}), {after}, g);
    REQUIRE(report.kept.size() == 1);
    CHECK(report.unevaluable == std::vector<std::string>{"Bare"});

    // Partition: kept + dropped + unevaluable covers the input exactly.
    CHECK(report.kept.size() + report.dropped.size() + report.unevaluable.size() == 2);
}

TEST_CASE("filter trace is valid json-ish output") {
    KnowledgeGraph g = candidate_graph();
    TemporalConstraint after{TemporalKind::After, {1880, 1894}, "clue"};
    auto report = filter_candidates(candidates({"Humboldt", "X", "Bare"}), {after}, g);
    std::string line = filter_trace_json("which one?", report);
    CHECK(line.find("\"kept\"") != std::string::npos);
    CHECK(line.find("Humboldt") != std::string::npos);
    CHECK(line.find("unevaluable") != std::string::npos);
}

TEST_CASE("filter equals the naive oracle on random instances") {
    Rng rng(71);

    // Random graph of annotated candidates.
    std::vector<Fact> facts;
    const size_t n = 60;
    for (size_t i = 0; i < n; ++i) {
        Fact f;
        f.subject = "S";
        f.relation = "r";
        f.object = "C" + std::to_string(i);
        if (rng.next_below(10) < 8) {
            int start = 1800 + static_cast<int>(rng.next_below(200));
            f.interval = TimeInterval{start, start + static_cast<int>(rng.next_below(40))};
        }
        if (rng.next_below(10) < 8)
            f.location = GeoPoint{std::round((rng.next_double() * 80 - 40) * 100) / 100,
                                  std::round((rng.next_double() * 80 - 40) * 100) / 100};
        facts.push_back(f);
    }
    KnowledgeGraph g = KnowledgeGraph::from_facts(facts);

    for (int trial = 0; trial < 1000; ++trial) {
        // Random candidate subset in random order.
        ScoredCandidates cands;
        for (size_t i = 0; i < n; ++i)
            if (rng.next_below(2) == 0)
                cands.push_back({"C" + std::to_string(i), rng.next_double()});

        std::vector<Constraint> constraints;
        if (rng.next_below(2) == 0) {
            int start = 1820 + static_cast<int>(rng.next_below(160));
            TemporalConstraint t{static_cast<TemporalKind>(rng.next_below(3)),
                                 {start, start + static_cast<int>(rng.next_below(60))},
                                 "clue"};
            constraints.push_back(t);
        }
        if (rng.next_below(2) == 0) {
            SpatialConstraint s;
            if (rng.next_below(2) == 0) {
                s.kind = SpatialKind::Direction;
                s.direction = static_cast<Direction>(rng.next_below(8));
            } else {
                s.kind = SpatialKind::WithinDistance;
                s.miles = 1 + static_cast<int>(rng.next_below(4000));
            }
            s.cluePoint = GeoPoint{rng.next_double() * 80 - 40, rng.next_double() * 80 - 40};
            constraints.push_back(s);
        }

        auto report = filter_candidates(cands, constraints, g);
        auto expect = oracle::filter_equivalence_oracle(cands, constraints, g);

        // Oracle equivalence on the kept set.
        std::set<std::string> kept_ids;
        for (const auto& c : report.kept) kept_ids.insert(c.id);
        CHECK(kept_ids == expect);

        // Subset + order preservation.
        size_t cursor = 0;
        for (const auto& k : report.kept) {
            while (cursor < cands.size() && cands[cursor].id != k.id) ++cursor;
            CHECK(cursor < cands.size());
        }

        // Monotonicity: one more constraint never grows the kept set.
        TemporalConstraint extra{TemporalKind::Before, {1825, 1830}, "clue"};
        auto with_extra = constraints;
        with_extra.push_back(extra);
        auto report2 = filter_candidates(cands, with_extra, g);
        CHECK(report2.kept.size() <= report.kept.size());
    }
}
