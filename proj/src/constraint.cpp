#include "stkgqa/constraint.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace stkgqa {

const char* direction_name(Direction d) {
    switch (d) {
        case Direction::N: return "N";
        case Direction::S: return "S";
        case Direction::E: return "E";
        case Direction::W: return "W";
        case Direction::NE: return "NE";
        case Direction::NW: return "NW";
        case Direction::SE: return "SE";
        case Direction::SW: return "SW";
    }
    return "?";
}

Direction direction_from_name(const std::string& name) {
    static const std::array<std::pair<const char*, Direction>, 8> table{{
        {"N", Direction::N},
        {"S", Direction::S},
        {"E", Direction::E},
        {"W", Direction::W},
        {"NE", Direction::NE},
        {"NW", Direction::NW},
        {"SE", Direction::SE},
        {"SW", Direction::SW},
    }};
    for (const auto& [n, d] : table)
        if (name == n) return d;
    throw std::invalid_argument("unknown direction: " + name);
}

const char* temporal_kind_name(TemporalKind k) {
    switch (k) {
        case TemporalKind::Before: return "before";
        case TemporalKind::After: return "after";
        case TemporalKind::During: return "during";
    }
    return "?";
}

const char* constraint_class_name(ConstraintClass c) {
    switch (c) {
        case ConstraintClass::DTC: return "DTC";
        case ConstraintClass::STC: return "STC";
        case ConstraintClass::DDC: return "DDC";
        case ConstraintClass::SDC: return "SDC";
        case ConstraintClass::DC: return "DC";
    }
    return "?";
}

ConstraintClass classify(const TemporalConstraint& c) {
    return c.kind == TemporalKind::During ? ConstraintClass::DTC : ConstraintClass::STC;
}

ConstraintClass classify(const SpatialConstraint& c) {
    if (c.kind == SpatialKind::WithinDistance) return ConstraintClass::DC;
    return is_diagonal(c.direction) ? ConstraintClass::DDC : ConstraintClass::SDC;
}

ConstraintClass classify(const Constraint& c) {
    return std::visit([](const auto& v) { return classify(v); }, c);
}

std::optional<TemporalConstraint> derive_temporal_constraint(const TimeInterval& central,
                                                             const TimeInterval& clue) {
    if (clue.start <= central.start && central.end <= clue.end)
        return TemporalConstraint{TemporalKind::During, clue, {}};
    if (central.end < clue.start) return TemporalConstraint{TemporalKind::Before, clue, {}};
    if (central.start > clue.end) return TemporalConstraint{TemporalKind::After, clue, {}};
    return std::nullopt;
}

namespace {

int ceiled_miles(const GeoPoint& a, const GeoPoint& b) {
    int m = static_cast<int>(std::ceil(haversine_miles(a, b)));
    return m < 1 ? 1 : m;
}

Direction diagonal_of(bool north, bool east) {
    if (north) return east ? Direction::NE : Direction::NW;
    return east ? Direction::SE : Direction::SW;
}

}  // namespace

SpatialConstraint derive_spatial_constraint(const GeoPoint& central, const GeoPoint& clue,
                                            Rng& rng) {
    const bool lat_differs = central.lat != clue.lat;
    const bool lon_differs = central.lon != clue.lon;

    SpatialConstraint out;
    out.cluePoint = clue;

    if (!lat_differs && !lon_differs) {
        out.kind = SpatialKind::WithinDistance;
        out.miles = ceiled_miles(central, clue);
        return out;
    }

    // Applicable kinds in fixed draw order: DDC, SDC, DC.
    std::array<int, 3> applicable{};
    size_t n = 0;
    if (lat_differs && lon_differs) applicable[n++] = 0;
    applicable[n++] = 1;
    applicable[n++] = 2;
    const int pick = applicable[rng.next_below(n)];

    if (pick == 2) {
        out.kind = SpatialKind::WithinDistance;
        out.miles = ceiled_miles(central, clue);
        return out;
    }

    const bool north = central.lat > clue.lat;
    const bool east = central.lon > clue.lon;
    out.kind = SpatialKind::Direction;
    if (pick == 0) {
        out.direction = diagonal_of(north, east);
    } else {
        bool use_lat = lat_differs;
        if (lat_differs && lon_differs) use_lat = rng.next_below(2) == 0;
        out.direction = use_lat ? (north ? Direction::N : Direction::S)
                                : (east ? Direction::E : Direction::W);
    }
    return out;
}

std::string constraint_to_json(const Constraint& c) {
    nlohmann::json j;
    if (const auto* t = std::get_if<TemporalConstraint>(&c)) {
        j["type"] = temporal_kind_name(t->kind);
        j["clue_entity"] = t->clueEntity;
    } else {
        const auto& s = std::get<SpatialConstraint>(c);
        if (s.kind == SpatialKind::Direction) {
            j["type"] = "direction";
            j["direction"] = direction_name(s.direction);
        } else {
            j["type"] = "within";
            j["miles"] = s.miles;
        }
        j["clue_entity"] = s.clueEntity;
    }
    return j.dump();
}

Constraint constraint_from_json(const std::string& json) {
    const auto j = nlohmann::json::parse(json);
    const std::string type = j.at("type").get<std::string>();
    const std::string clue = j.at("clue_entity").get<std::string>();
    if (type == "before" || type == "after" || type == "during") {
        TemporalConstraint t;
        t.kind = type == "before"  ? TemporalKind::Before
                 : type == "after" ? TemporalKind::After
                                   : TemporalKind::During;
        t.clueEntity = clue;
        return t;
    }
    SpatialConstraint s;
    s.clueEntity = clue;
    if (type == "direction") {
        s.kind = SpatialKind::Direction;
        s.direction = direction_from_name(j.at("direction").get<std::string>());
    } else if (type == "within") {
        s.kind = SpatialKind::WithinDistance;
        s.miles = j.at("miles").get<int>();
        if (s.miles < 1) throw std::invalid_argument("constraint miles must be >= 1");
    } else {
        throw std::invalid_argument("unknown constraint type: " + type);
    }
    return s;
}

namespace {

const char* direction_surface(Direction d) {
    switch (d) {
        case Direction::N: return "north of";
        case Direction::S: return "south of";
        case Direction::E: return "east of";
        case Direction::W: return "west of";
        case Direction::NE: return "northeast of";
        case Direction::NW: return "northwest of";
        case Direction::SE: return "southeast of";
        case Direction::SW: return "southwest of";
    }
    return "?";
}

}  // namespace

std::string constraint_surface_text(const Constraint& c) {
    if (const auto* t = std::get_if<TemporalConstraint>(&c)) return temporal_kind_name(t->kind);
    const auto& s = std::get<SpatialConstraint>(c);
    if (s.kind == SpatialKind::Direction) return direction_surface(s.direction);
    return "within " + std::to_string(s.miles) + " miles of";
}

}  // namespace stkgqa
