#include "stkgqa/synth.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "stkgqa/rng.hpp"
#include "stkgqa/templates.hpp"

namespace stkgqa {

namespace {

double quantized(double v) { return std::round(v * 100.0) / 100.0; }

struct CanonicalEntity {
    std::string id;
    TimeInterval interval;
    GeoPoint point;
};

}  // namespace

KnowledgeGraph make_synthetic_stkg(const SynthConfig& cfg) {
    Rng rng(Rng::derive(cfg.seed, 0x517C));

    std::vector<CanonicalEntity> orgs(cfg.orgs), places(cfg.places), events(cfg.events);
    for (size_t i = 0; i < cfg.orgs; ++i) {
        int start = 1850 + static_cast<int>(rng.next_below(150));
        orgs[i] = {"Org_" + std::to_string(i),
                   TimeInterval{start, start + 1 + static_cast<int>(rng.next_below(12))},
                   GeoPoint{quantized(20.0 + rng.next_double() * 40.0),
                            quantized(-20.0 + rng.next_double() * 60.0)}};
    }
    for (size_t i = 0; i < cfg.places; ++i) {
        places[i] = {"Place_" + std::to_string(i),
                     {},
                     GeoPoint{quantized(20.0 + rng.next_double() * 40.0),
                              quantized(-20.0 + rng.next_double() * 60.0)}};
    }
    for (size_t i = 0; i < cfg.events; ++i) {
        // Wide spans so containment (during) is derivable reasonably often.
        int start = 1820 + static_cast<int>(rng.next_below(140));
        events[i] = {"Event_" + std::to_string(i),
                     TimeInterval{start, start + 20 + static_cast<int>(rng.next_below(70))},
                     {}};
    }

    const std::vector<std::string> person_relations{"worksAt",  "playsFor",    "memberOf",
                                                    "graduatedFrom", "livesIn", "isCitizenOf"};
    std::vector<Fact> facts;

    for (size_t p = 0; p < cfg.persons; ++p) {
        const std::string person = "Person_" + std::to_string(p);

        // Distinct relations for this person.
        std::vector<size_t> rel_pick;
        while (rel_pick.size() < cfg.relations_per_person) {
            size_t r = rng.next_below(person_relations.size());
            bool dup = false;
            for (size_t q : rel_pick) dup = dup || q == r;
            if (!dup) rel_pick.push_back(r);
        }

        for (size_t r : rel_pick) {
            const std::string& rel = person_relations[r];
            size_t span = cfg.max_objects - cfg.min_objects + 1;
            size_t k = cfg.min_objects + rng.next_below(span);
            std::vector<bool> used(cfg.orgs, false);
            for (size_t j = 0; j < k; ++j) {
                size_t o = rng.next_below(cfg.orgs);
                if (used[o]) continue;
                used[o] = true;
                facts.push_back(Fact{person, rel, orgs[o].id, orgs[o].interval, orgs[o].point});
            }
        }

        // Temporal clue anchors: events the person participated in.
        size_t n_events = 1 + rng.next_below(2);
        for (size_t j = 0; j < n_events; ++j) {
            const auto& ev = events[rng.next_below(cfg.events)];
            facts.push_back(Fact{person, "participatedIn", ev.id, ev.interval, std::nullopt});
        }
    }

    // Spatial clue anchors two hops out: org -> place.
    for (size_t o = 0; o < cfg.orgs; ++o) {
        const auto& pl = places[rng.next_below(cfg.places)];
        facts.push_back(Fact{orgs[o].id, "location", pl.id, std::nullopt, pl.point});
    }

    // Ambiguous-relation facts the clue miner must skip.
    for (size_t i = 0; i < cfg.ambiguous_facts; ++i) {
        const std::string a = "Person_" + std::to_string(rng.next_below(cfg.persons));
        const auto& ev = events[rng.next_below(cfg.events)];
        facts.push_back(Fact{a, i % 2 == 0 ? "influence" : "linksTo", ev.id, ev.interval,
                             std::nullopt});
    }

    // Plain unannotated facts.
    for (size_t i = 0; i < cfg.plain_facts; ++i) {
        const std::string a = "Person_" + std::to_string(rng.next_below(cfg.persons));
        const std::string b = "Person_" + std::to_string(rng.next_below(cfg.persons));
        if (a == b) continue;
        facts.push_back(Fact{a, "knows", b, std::nullopt, std::nullopt});
    }

    return KnowledgeGraph::from_facts(std::move(facts));
}

}  // namespace stkgqa
