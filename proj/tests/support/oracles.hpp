#pragma once

// Independent re-implementations used only to cross-check the library.
// Everything here is deliberately written from the definitions, not by
// calling back into the code under test.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "stkgqa/constraint.hpp"
#include "stkgqa/graph.hpp"

namespace oracle {

// Spherical law of cosines on the same mean radius.
inline double law_of_cosines_miles(const stkgqa::GeoPoint& a, const stkgqa::GeoPoint& b) {
    const double deg = M_PI / 180.0;
    double p1 = a.lat * deg, p2 = b.lat * deg;
    double cosc = std::sin(p1) * std::sin(p2) +
                  std::cos(p1) * std::cos(p2) * std::cos((b.lon - a.lon) * deg);
    cosc = std::max(-1.0, std::min(1.0, cosc));
    return stkgqa::kEarthRadiusMiles * std::acos(cosc);
}

inline bool naive_temporal(const stkgqa::TimeInterval& cand, stkgqa::TemporalKind kind,
                           const stkgqa::TimeInterval& clue) {
    using stkgqa::TemporalKind;
    if (kind == TemporalKind::Before) return cand.end < clue.start;
    if (kind == TemporalKind::After) return cand.start > clue.end;
    return cand.start >= clue.start && cand.end <= clue.end;
}

inline bool naive_direction(const stkgqa::GeoPoint& cand, const stkgqa::GeoPoint& clue,
                            stkgqa::Direction d) {
    using stkgqa::Direction;
    const double dlat = cand.lat - clue.lat;
    const double dlon = cand.lon - clue.lon;
    switch (d) {
        case Direction::N: return dlat > 0;
        case Direction::S: return dlat < 0;
        case Direction::E: return dlon > 0;
        case Direction::W: return dlon < 0;
        case Direction::NE: return dlat > 0 && dlon > 0;
        case Direction::NW: return dlat > 0 && dlon < 0;
        case Direction::SE: return dlat < 0 && dlon > 0;
        case Direction::SW: return dlat < 0 && dlon < 0;
    }
    return false;
}

inline bool naive_distance(const stkgqa::GeoPoint& cand, const stkgqa::GeoPoint& clue,
                           int miles) {
    double d = law_of_cosines_miles(cand, clue);
    double rounded = std::round(d * 10.0) / 10.0;
    return rounded <= static_cast<double>(miles);
}

// Brute-force hop-bounded neighborhood: grow the entity set one hop at a
// time, then keep facts incident to an entity reached strictly before the
// last ring.
inline std::vector<stkgqa::Fact> bfs_subgraph(const std::vector<stkgqa::Fact>& facts,
                                              const std::string& center, int hops) {
    std::vector<std::unordered_set<std::string>> rings;
    rings.push_back({center});
    std::unordered_set<std::string> reached{center};
    for (int h = 0; h < hops; ++h) {
        std::unordered_set<std::string> next;
        for (const auto& f : facts) {
            if (rings.back().count(f.subject) && !reached.count(f.object)) next.insert(f.object);
            if (rings.back().count(f.object) && !reached.count(f.subject)) next.insert(f.subject);
        }
        for (const auto& e : next) reached.insert(e);
        rings.push_back(std::move(next));
    }
    // Distance of each entity = index of the ring that first contains it.
    auto dist_of = [&](const std::string& e) -> int {
        for (size_t i = 0; i < rings.size(); ++i)
            if (rings[i].count(e)) return static_cast<int>(i);
        return -1;
    };
    std::vector<stkgqa::Fact> out;
    for (const auto& f : facts) {
        int ds = dist_of(f.subject), dobj = dist_of(f.object);
        bool in = (ds >= 0 && ds <= hops - 1) || (dobj >= 0 && dobj <= hops - 1);
        if (in) out.push_back(f);
    }
    // De-duplicate exactly like a set over the serialized record.
    std::vector<stkgqa::Fact> dedup;
    std::set<std::string> seen;
    for (auto& f : out)
        if (seen.insert(stkgqa::fact_to_tsv(f)).second) dedup.push_back(std::move(f));
    return dedup;
}

}  // namespace oracle
