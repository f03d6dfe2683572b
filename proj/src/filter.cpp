#include "stkgqa/filter.hpp"

#include "json.hpp"

namespace stkgqa {

FilterReport filter_candidates(const ScoredCandidates& candidates,
                               const std::vector<Constraint>& constraints,
                               const KnowledgeGraph& graph) {
    FilterReport report;
    for (const ScoredCandidate& cand : candidates) {
        EntityProfile profile;
        if (graph.has_entity(cand.id)) profile = graph.spatiotemporal_profile(cand.id);

        bool missing = false;
        const Constraint* failed = nullptr;
        for (const Constraint& c : constraints) {
            if (const auto* t = std::get_if<TemporalConstraint>(&c)) {
                if (!profile.interval) {
                    missing = true;
                    break;
                }
                if (!t->evaluate(*profile.interval)) {
                    failed = &c;
                    break;
                }
            } else {
                const auto& s = std::get<SpatialConstraint>(c);
                if (!profile.location) {
                    missing = true;
                    break;
                }
                if (!s.evaluate(*profile.location)) {
                    failed = &c;
                    break;
                }
            }
        }

        if (missing)
            report.unevaluable.push_back(cand.id);
        else if (failed)
            report.dropped.emplace_back(cand.id, *failed);
        else
            report.kept.push_back(cand);
    }
    return report;
}

std::string filter_trace_json(const std::string& question, const FilterReport& report) {
    nlohmann::json j;
    j["question"] = question;
    auto& kept = j["kept"] = nlohmann::json::array();
    for (const auto& c : report.kept) kept.push_back({{"entity", c.id}, {"prob", c.prob}});
    auto& dropped = j["dropped"] = nlohmann::json::array();
    for (const auto& [id, c] : report.dropped)
        dropped.push_back(
            {{"entity", id}, {"failed", nlohmann::json::parse(constraint_to_json(c))}});
    j["unevaluable"] = report.unevaluable;
    return j.dump();
}

}  // namespace stkgqa
