#pragma once

#include <cstdint>

#include "stkgqa/graph.hpp"

namespace stkgqa {

// Deterministic synthetic STKG for the lab experiments, tests and the
// kernel benchmark. Entities carry canonical annotations; every relation
// fact is annotated with its object's canonical interval and coordinates,
// so entity profiles, fact annotations and constraint resolution agree.
// Objects sharing a (subject, relation) pair differ in their annotations,
// which is what makes the completion task depend on time and place.
struct SynthConfig {
    uint64_t seed = 1;
    size_t persons = 40;
    size_t orgs = 100;
    size_t places = 40;
    size_t events = 20;
    size_t relations_per_person = 2;
    size_t min_objects = 18;   // objects per (person, relation)
    size_t max_objects = 26;
    size_t plain_facts = 60;   // unannotated filler
    size_t ambiguous_facts = 30;
};

KnowledgeGraph make_synthetic_stkg(const SynthConfig& cfg = {});

}  // namespace stkgqa
