#pragma once

// Naive per-candidate filter used only to cross-check filter_candidates.
// Constraint evaluation goes through the independent comparisons in
// oracles.hpp, not through the library's eval_* functions.

#include <set>
#include <string>
#include <vector>

#include "stkgqa/filter.hpp"
#include "support/oracles.hpp"

namespace oracle {

inline std::set<std::string> filter_equivalence_oracle(
    const stkgqa::ScoredCandidates& candidates,
    const std::vector<stkgqa::Constraint>& constraints, const stkgqa::KnowledgeGraph& graph) {
    std::set<std::string> kept;
    for (const auto& cand : candidates) {
        bool ok = true;
        for (const auto& c : constraints) {
            if (const auto* t = std::get_if<stkgqa::TemporalConstraint>(&c)) {
                auto interval =
                    graph.has_entity(cand.id) ? graph.entity_interval(cand.id) : std::nullopt;
                if (!interval || !naive_temporal(*interval, t->kind, t->clueInterval)) {
                    ok = false;
                    break;
                }
            } else {
                const auto& s = std::get<stkgqa::SpatialConstraint>(c);
                auto point =
                    graph.has_entity(cand.id) ? graph.entity_coords(cand.id) : std::nullopt;
                if (!point) {
                    ok = false;
                    break;
                }
                bool pass = s.kind == stkgqa::SpatialKind::Direction
                                ? naive_direction(*point, s.cluePoint, s.direction)
                                : naive_distance(*point, s.cluePoint, s.miles);
                if (!pass) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) kept.insert(cand.id);
    }
    return kept;
}

}  // namespace oracle
