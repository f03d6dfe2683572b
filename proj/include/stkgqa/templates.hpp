#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stkgqa/constraint.hpp"

namespace stkgqa {

// One seed template. The text carries five slots, each exactly once:
//   {central_entity} {temporal_clue} {geo_clue}
//   [temporal_constraint] [geo_constraint]
// The constraint slots immediately precede their clue slots somewhere in the
// text so that keyword-based annotation can classify the mentions.
struct SeedTemplate {
    std::string id;
    std::string relation;
    std::string text;
};

// The ten relations covered by the shipped template set.
const std::vector<std::string>& template_relations();

// Loads and validates a JSON template file: all five slots exactly once per
// template and exactly four templates per relation.
std::vector<SeedTemplate> load_templates(const std::filesystem::path& path);

std::string fill_template(const SeedTemplate& tpl, const std::string& central,
                          const Constraint& temporal, const std::string& ts_clue,
                          const Constraint& spatial, const std::string& geo_clue);

}  // namespace stkgqa
