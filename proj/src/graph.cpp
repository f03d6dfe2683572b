#include "stkgqa/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace stkgqa {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

[[noreturn]] void fail(size_t line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

int parse_year(const std::string& field, size_t line_no, const char* which) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail(line_no, std::string("malformed ") + which + " year '" + field + "'");
    return value;
}

double parse_coord(const std::string& field, size_t line_no, const char* which) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail(line_no, std::string("malformed ") + which + " '" + field + "'");
    return value;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

Fact parse_fact_line(const std::string& line, size_t line_no, const ParseLimits& limits) {
    const auto fields = split_tabs(line);
    if (fields.size() != 7)
        fail(line_no, "expected 7 tab-separated fields, got " + std::to_string(fields.size()));

    Fact f;
    f.subject = fields[0];
    f.relation = fields[1];
    f.object = fields[2];
    if (f.subject.empty()) fail(line_no, "empty subject");
    if (f.relation.empty()) fail(line_no, "empty relation");
    if (f.object.empty()) fail(line_no, "empty object");

    const bool has_start = !fields[3].empty(), has_end = !fields[4].empty();
    if (has_start != has_end) fail(line_no, "interval must have both start and end or neither");
    if (has_start) {
        TimeInterval t{parse_year(fields[3], line_no, "start"),
                       parse_year(fields[4], line_no, "end")};
        if (t.start > t.end)
            fail(line_no, "interval start " + std::to_string(t.start) + " exceeds end " +
                              std::to_string(t.end));
        if (t.start < limits.min_year || t.end > limits.max_year)
            fail(line_no, "interval outside permitted span " + std::to_string(limits.min_year) +
                              ".." + std::to_string(limits.max_year));
        f.interval = t;
    }

    const bool has_lat = !fields[5].empty(), has_lon = !fields[6].empty();
    if (has_lat != has_lon) fail(line_no, "location must have both lat and lon or neither");
    if (has_lat) {
        GeoPoint p{parse_coord(fields[5], line_no, "latitude"),
                   parse_coord(fields[6], line_no, "longitude")};
        if (p.lat < -90.0 || p.lat > 90.0)
            fail(line_no, "latitude out of range: " + fields[5]);
        if (p.lon < -180.0 || p.lon > 180.0)
            fail(line_no, "longitude out of range: " + fields[6]);
        f.location = p;
    }
    return f;
}

std::string fact_to_tsv(const Fact& f) {
    std::string out;
    out += f.subject;
    out += '\t';
    out += f.relation;
    out += '\t';
    out += f.object;
    out += '\t';
    if (f.interval) {
        out += std::to_string(f.interval->start);
        out += '\t';
        out += std::to_string(f.interval->end);
    } else {
        out += '\t';
    }
    out += '\t';
    if (f.location) {
        out += format_double(f.location->lat);
        out += '\t';
        out += format_double(f.location->lon);
    } else {
        out += '\t';
    }
    return out;
}

KnowledgeGraph KnowledgeGraph::from_facts(std::vector<Fact> facts) {
    KnowledgeGraph g;
    std::unordered_set<std::string> seen;
    seen.reserve(facts.size());
    for (auto& f : facts) {
        if (!seen.insert(fact_to_tsv(f)).second) {
            ++g.duplicates_;
            continue;
        }
        g.facts_.push_back(std::move(f));
    }
    g.build_indexes();
    return g;
}

KnowledgeGraph KnowledgeGraph::load(std::istream& in, const ParseLimits& limits) {
    std::vector<Fact> facts;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        facts.push_back(parse_fact_line(line, line_no, limits));
    }
    return from_facts(std::move(facts));
}

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& path, const ParseLimits& limits) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fact file: " + path.string());
    return load(in, limits);
}

void KnowledgeGraph::build_indexes() {
    std::set<std::string> ents, rels;
    for (size_t i = 0; i < facts_.size(); ++i) {
        const Fact& f = facts_[i];
        by_subject_[f.subject].push_back(i);
        by_object_[f.object].push_back(i);
        by_relation_[f.relation].push_back(i);
        ents.insert(f.subject);
        ents.insert(f.object);
        rels.insert(f.relation);
        if (f.location && !entity_coords_.count(f.object))
            entity_coords_.emplace(f.object, *f.location);
    }
    // Interval profile prefers object-side facts, then subject-side, first
    // file occurrence winning within each.
    for (const Fact& f : facts_)
        if (f.interval && !entity_intervals_.count(f.object))
            entity_intervals_.emplace(f.object, *f.interval);
    for (const Fact& f : facts_)
        if (f.interval && !entity_intervals_.count(f.subject))
            entity_intervals_.emplace(f.subject, *f.interval);

    entities_.assign(ents.begin(), ents.end());
    relations_.assign(rels.begin(), rels.end());
    for (size_t i = 0; i < entities_.size(); ++i) entity_index_.emplace(entities_[i], i);
}

const std::vector<size_t>& KnowledgeGraph::by_subject(const std::string& id) const {
    static const std::vector<size_t> empty;
    auto it = by_subject_.find(id);
    return it == by_subject_.end() ? empty : it->second;
}

const std::vector<size_t>& KnowledgeGraph::by_object(const std::string& id) const {
    static const std::vector<size_t> empty;
    auto it = by_object_.find(id);
    return it == by_object_.end() ? empty : it->second;
}

const std::vector<size_t>& KnowledgeGraph::by_relation(const std::string& id) const {
    static const std::vector<size_t> empty;
    auto it = by_relation_.find(id);
    return it == by_relation_.end() ? empty : it->second;
}

std::optional<GeoPoint> KnowledgeGraph::entity_coords(const std::string& id) const {
    auto it = entity_coords_.find(id);
    if (it == entity_coords_.end()) return std::nullopt;
    return it->second;
}

std::optional<TimeInterval> KnowledgeGraph::entity_interval(const std::string& id) const {
    auto it = entity_intervals_.find(id);
    if (it == entity_intervals_.end()) return std::nullopt;
    return it->second;
}

EntityProfile KnowledgeGraph::spatiotemporal_profile(const std::string& id) const {
    if (!has_entity(id)) throw std::invalid_argument("unknown entity: " + id);
    return EntityProfile{entity_interval(id), entity_coords(id)};
}

std::vector<Fact> KnowledgeGraph::subgraph_within_hops(const std::string& center, int hops) const {
    if (hops < 1) throw std::invalid_argument("hops must be >= 1");
    if (!has_entity(center)) throw std::invalid_argument("unknown entity: " + center);

    // BFS over entity nodes; a fact (edge) is within h hops when one of its
    // endpoints is at distance <= h-1 from the center.
    std::unordered_map<std::string, int> dist;
    dist.emplace(center, 0);
    std::deque<std::string> frontier{center};
    while (!frontier.empty()) {
        std::string node = std::move(frontier.front());
        frontier.pop_front();
        int d = dist[node];
        if (d >= hops - 1) continue;
        auto visit = [&](const std::string& next) {
            if (dist.emplace(next, d + 1).second) frontier.push_back(next);
        };
        for (size_t i : by_subject(node)) visit(facts_[i].object);
        for (size_t i : by_object(node)) visit(facts_[i].subject);
    }

    std::vector<Fact> out;
    for (const Fact& f : facts_) {
        auto s = dist.find(f.subject);
        auto o = dist.find(f.object);
        int best = hops;  // hops-1 is the largest admissible endpoint distance
        if (s != dist.end()) best = std::min(best, s->second);
        if (o != dist.end()) best = std::min(best, o->second);
        if (best <= hops - 1) out.push_back(f);
    }
    return out;
}

KnowledgeGraph KnowledgeGraph::complete_fact_locations() const {
    std::vector<Fact> updated = facts_;
    for (Fact& f : updated) {
        if (f.location) continue;
        auto coords = entity_coords(f.object);
        if (coords) f.location = *coords;
    }
    return from_facts(std::move(updated));
}

KnowledgeGraph KnowledgeGraph::strip_annotations(bool drop_time, bool drop_location) const {
    std::vector<Fact> updated = facts_;
    for (Fact& f : updated) {
        if (drop_time) f.interval.reset();
        if (drop_location) f.location.reset();
    }
    return from_facts(std::move(updated));
}

GraphStats KnowledgeGraph::stats() const {
    GraphStats s;
    s.facts = facts_.size();
    s.entities = entities_.size();
    s.relations = relations_.size();
    std::set<int> years;
    std::set<std::pair<long, long>> coords;
    bool any_interval = false;
    for (const Fact& f : facts_) {
        if (f.interval) {
            ++s.facts_with_interval;
            years.insert(f.interval->start);
            years.insert(f.interval->end);
            if (!any_interval) {
                s.span_min = f.interval->start;
                s.span_max = f.interval->end;
                any_interval = true;
            } else {
                s.span_min = std::min(s.span_min, f.interval->start);
                s.span_max = std::max(s.span_max, f.interval->end);
            }
        }
        if (f.location) {
            ++s.facts_with_location;
            coords.insert({std::lround(f.location->lat * 100.0),
                           std::lround(f.location->lon * 100.0)});
        }
        if (f.interval && f.location) ++s.facts_fully_annotated;
    }
    s.timestamps = years.size();
    s.coordinates = coords.size();
    return s;
}

void KnowledgeGraph::write_tsv(std::ostream& out) const {
    for (const Fact& f : facts_) out << fact_to_tsv(f) << '\n';
}

void KnowledgeGraph::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write fact file: " + path.string());
    write_tsv(out);
}

}  // namespace stkgqa
