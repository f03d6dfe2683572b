#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace stkgqa {

// Mean Earth radius in statute miles (6371.0088 km).
inline constexpr double kEarthRadiusMiles = 3958.7613;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]

    bool operator==(const GeoPoint&) const = default;
};

inline bool valid_geo(const GeoPoint& p) {
    return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

enum class Direction : uint8_t { N, S, E, W, NE, NW, SE, SW };

inline bool is_diagonal(Direction d) { return d >= Direction::NE; }

const char* direction_name(Direction d);
Direction direction_from_name(const std::string& name);  // throws on unknown name

// Great-circle distance on a sphere of radius kEarthRadiusMiles.
inline double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg = M_PI / 180.0;
    double phi1 = a.lat * deg, phi2 = b.lat * deg;
    double dphi = (b.lat - a.lat) * deg;
    double dlam = (b.lon - a.lon) * deg;
    double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlam / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

// Strict per-axis comparison; equality on a compared axis never satisfies.
// Diagonals require both axes strict.
inline bool eval_direction(const GeoPoint& candidate, const GeoPoint& clue, Direction d) {
    bool n = candidate.lat > clue.lat;
    bool s = candidate.lat < clue.lat;
    bool e = candidate.lon > clue.lon;
    bool w = candidate.lon < clue.lon;
    switch (d) {
        case Direction::N: return n;
        case Direction::S: return s;
        case Direction::E: return e;
        case Direction::W: return w;
        case Direction::NE: return n && e;
        case Direction::NW: return n && w;
        case Direction::SE: return s && e;
        case Direction::SW: return s && w;
    }
    return false;
}

// Half-away-from-zero rounding to one decimal.
inline double round_tenth_miles(double miles) { return std::round(miles * 10.0) / 10.0; }

// Distance constraint: Haversine, rounded to the nearest 0.1 mile, satisfied
// when the rounded value does not exceed the threshold.
inline bool eval_distance(const GeoPoint& candidate, const GeoPoint& clue, int miles) {
    if (miles < 1) throw std::invalid_argument("distance threshold must be >= 1 mile");
    return round_tenth_miles(haversine_miles(candidate, clue)) <= static_cast<double>(miles);
}

}  // namespace stkgqa
