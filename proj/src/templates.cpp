#include "stkgqa/templates.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "stkgqa/question.hpp"

namespace stkgqa {

const std::vector<std::string>& template_relations() {
    static const std::vector<std::string> relations{
        "location",    "livesIn",      "memberOf",       "dealsWith",      "playsFor",
        "worksAt",     "isCitizenOf",  "hasNeighbour",   "isPoliticianOf", "graduatedFrom"};
    return relations;
}

namespace {

size_t count_occurrences(const std::string& text, const std::string& slot) {
    size_t n = 0;
    for (size_t pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + 1))
        ++n;
    return n;
}

void validate(const std::vector<SeedTemplate>& templates, const std::string& where) {
    static const char* slots[] = {"{central_entity}", "{temporal_clue}", "{geo_clue}",
                                  "[temporal_constraint]", "[geo_constraint]"};
    std::map<std::string, size_t> per_relation;
    for (const auto& t : templates) {
        for (const char* slot : slots)
            if (count_occurrences(t.text, slot) != 1)
                throw std::runtime_error(where + ": template " + t.id + " must contain " + slot +
                                         " exactly once");
        ++per_relation[t.relation];
    }
    for (const auto& [rel, n] : per_relation)
        if (n != 4)
            throw std::runtime_error(where + ": relation " + rel + " has " + std::to_string(n) +
                                     " templates, expected 4");
}

std::string replace_once(std::string text, const std::string& slot, const std::string& value) {
    size_t pos = text.find(slot);
    text.replace(pos, slot.size(), value);
    return text;
}

}  // namespace

std::vector<SeedTemplate> load_templates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open template file: " + path.string());
    nlohmann::json j;
    in >> j;
    if (!j.is_array()) throw std::runtime_error("template file must be a JSON array");

    std::vector<SeedTemplate> out;
    for (const auto& item : j) {
        SeedTemplate t;
        t.id = item.at("id").get<std::string>();
        t.relation = item.at("relation").get<std::string>();
        t.text = item.at("text").get<std::string>();
        out.push_back(std::move(t));
    }
    validate(out, path.string());
    return out;
}

std::string fill_template(const SeedTemplate& tpl, const std::string& central,
                          const Constraint& temporal, const std::string& ts_clue,
                          const Constraint& spatial, const std::string& geo_clue) {
    std::string text = tpl.text;
    text = replace_once(text, "{central_entity}", entity_label(central));
    text = replace_once(text, "{temporal_clue}", entity_label(ts_clue));
    text = replace_once(text, "{geo_clue}", entity_label(geo_clue));
    text = replace_once(text, "[temporal_constraint]", constraint_surface_text(temporal));
    text = replace_once(text, "[geo_constraint]", constraint_surface_text(spatial));
    if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    return text;
}

}  // namespace stkgqa
