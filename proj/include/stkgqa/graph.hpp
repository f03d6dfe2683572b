#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stkgqa/geo.hpp"
#include "stkgqa/temporal.hpp"

namespace stkgqa {

// One STKG record: subject --relation--> object, optionally annotated with a
// year interval and the object's coordinates.
struct Fact {
    std::string subject;
    std::string relation;
    std::string object;
    std::optional<TimeInterval> interval;
    std::optional<GeoPoint> location;

    bool operator==(const Fact&) const = default;
};

struct ParseLimits {
    int min_year = 1;
    int max_year = 4000;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses one 7-column tab-separated record:
//   subject \t relation \t object \t start \t end \t lat \t lon
// Empty numeric fields mean "absent"; start/end and lat/lon must be absent or
// present together. `line_no` is only used for error messages.
Fact parse_fact_line(const std::string& line, size_t line_no = 0,
                     const ParseLimits& limits = {});

struct GraphStats {
    size_t facts = 0;
    size_t facts_with_interval = 0;
    size_t facts_with_location = 0;
    size_t facts_fully_annotated = 0;  // both interval and location
    size_t entities = 0;
    size_t relations = 0;
    size_t timestamps = 0;   // distinct years over starts and ends
    size_t coordinates = 0;  // distinct quantized points
    int span_min = 0;
    int span_max = 0;  // 0/0 when no fact carries an interval
};

struct EntityProfile {
    std::optional<TimeInterval> interval;
    std::optional<GeoPoint> location;
};

// Immutable after construction; any number of concurrent readers is safe.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    // Exact duplicate lines are dropped (first occurrence kept) and counted.
    static KnowledgeGraph from_facts(std::vector<Fact> facts);
    static KnowledgeGraph load(const std::filesystem::path& path, const ParseLimits& limits = {});
    static KnowledgeGraph load(std::istream& in, const ParseLimits& limits = {});

    const std::vector<Fact>& facts() const { return facts_; }
    size_t duplicates_dropped() const { return duplicates_; }

    bool has_entity(const std::string& id) const { return entity_index_.count(id) != 0; }

    // Fact positions (file order) per key; empty when the key is unknown.
    const std::vector<size_t>& by_subject(const std::string& id) const;
    const std::vector<size_t>& by_object(const std::string& id) const;
    const std::vector<size_t>& by_relation(const std::string& id) const;

    // Coordinates of the first fact (file order) whose object is `id` and
    // which carries a location.
    std::optional<GeoPoint> entity_coords(const std::string& id) const;
    // Interval of the first fact whose object is `id`, falling back to the
    // first fact whose subject is `id`.
    std::optional<TimeInterval> entity_interval(const std::string& id) const;

    // Throws std::invalid_argument for an unknown entity.
    EntityProfile spatiotemporal_profile(const std::string& id) const;

    // All facts reachable by undirected traversal of at most `hops` edges
    // from `center`, deduplicated, in file order. hops >= 1.
    std::vector<Fact> subgraph_within_hops(const std::string& center, int hops) const;

    // Every fact lacking a location whose object has known coordinates gains
    // them; everything else is copied unchanged. Idempotent.
    KnowledgeGraph complete_fact_locations() const;

    // Ablation support: returns a copy with interval and/or location
    // annotations removed from every fact.
    KnowledgeGraph strip_annotations(bool drop_time, bool drop_location) const;

    GraphStats stats() const;

    // Entities in ascending id order (also the ranking tie-break order).
    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& relation_ids() const { return relations_; }

    void write_tsv(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

private:
    void build_indexes();

    std::vector<Fact> facts_;
    size_t duplicates_ = 0;
    std::vector<std::string> entities_;   // sorted
    std::vector<std::string> relations_;  // sorted
    std::unordered_map<std::string, size_t> entity_index_;
    std::unordered_map<std::string, std::vector<size_t>> by_subject_;
    std::unordered_map<std::string, std::vector<size_t>> by_object_;
    std::unordered_map<std::string, std::vector<size_t>> by_relation_;
    std::unordered_map<std::string, GeoPoint> entity_coords_;
    std::unordered_map<std::string, TimeInterval> entity_intervals_;
};

// Canonical text form of a fact (used by write_tsv and the dedup key).
std::string fact_to_tsv(const Fact& f);

}  // namespace stkgqa
