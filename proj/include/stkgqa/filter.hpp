#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stkgqa/constraint.hpp"
#include "stkgqa/graph.hpp"
#include "stkgqa/question.hpp"

namespace stkgqa {

// Outcome of constraint filtering over a ranked candidate list. The three
// buckets partition the input; `kept` preserves the input order and carries
// the original probabilities unchanged (ranks are what matter downstream).
struct FilterReport {
    ScoredCandidates kept;
    std::vector<std::pair<std::string, Constraint>> dropped;  // first failed constraint
    std::vector<std::string> unevaluable;  // missing the annotation a constraint needs
};

// A candidate survives iff every constraint evaluates true against its
// interval/point from spatiotemporal_profile. Candidates lacking a needed
// annotation are reported separately (and excluded from kept).
FilterReport filter_candidates(const ScoredCandidates& candidates,
                               const std::vector<Constraint>& constraints,
                               const KnowledgeGraph& graph);

// One JSON line per question for `--trace` audits.
std::string filter_trace_json(const std::string& question, const FilterReport& report);

}  // namespace stkgqa
