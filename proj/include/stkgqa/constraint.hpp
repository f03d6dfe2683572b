#pragma once

#include <optional>
#include <string>
#include <variant>

#include "stkgqa/geo.hpp"
#include "stkgqa/rng.hpp"
#include "stkgqa/temporal.hpp"

namespace stkgqa {

// During is a double-timestamp constraint (DTC); Before/After are single
// (STC). Diagonal directions are DDC, cardinals SDC, distance DC.
enum class ConstraintClass : uint8_t { DTC, STC, DDC, SDC, DC };

const char* constraint_class_name(ConstraintClass c);

struct TemporalConstraint {
    TemporalKind kind = TemporalKind::Before;
    TimeInterval clueInterval;
    std::string clueEntity;

    bool evaluate(const TimeInterval& candidate) const {
        return eval_temporal(candidate, kind, clueInterval);
    }
};

enum class SpatialKind : uint8_t { Direction, WithinDistance };

struct SpatialConstraint {
    SpatialKind kind = SpatialKind::Direction;
    Direction direction = Direction::N;  // meaningful when kind == Direction
    int miles = 1;                       // meaningful when kind == WithinDistance
    GeoPoint cluePoint;
    std::string clueEntity;

    bool evaluate(const GeoPoint& candidate) const {
        return kind == SpatialKind::Direction ? eval_direction(candidate, cluePoint, direction)
                                              : eval_distance(candidate, cluePoint, miles);
    }
};

using Constraint = std::variant<TemporalConstraint, SpatialConstraint>;

ConstraintClass classify(const TemporalConstraint& c);
ConstraintClass classify(const SpatialConstraint& c);
ConstraintClass classify(const Constraint& c);

// DTC first: containment of the central span inside the clue span wins even
// when a one-sided comparison would also be derivable. Returns nothing for
// plain overlap.
std::optional<TemporalConstraint> derive_temporal_constraint(const TimeInterval& central,
                                                             const TimeInterval& clue);

// Draws uniformly among the applicable spatial constraint kinds (DDC needs
// both axes strictly distinct, SDC at least one, DC always applies). The
// distance threshold is the ceiled Haversine distance, floored at 1 mile;
// coincident points fall back to DC.
SpatialConstraint derive_spatial_constraint(const GeoPoint& central, const GeoPoint& clue,
                                            Rng& rng);

// Dataset-file serialization:
//   {"type":"before"|"after"|"during","clue_entity":id}
//   {"type":"direction","direction":"NE","clue_entity":id}
//   {"type":"within","miles":n,"clue_entity":id}
// The clue annotation itself is re-resolved from the graph when loading.
std::string constraint_to_json(const Constraint& c);

// Parses the serialized form; clueInterval/cluePoint are left default and
// must be resolved against a graph before evaluation.
Constraint constraint_from_json(const std::string& json);

// Surface text used when filling templates, e.g. "before", "northeast of",
// "within 3 miles of".
std::string constraint_surface_text(const Constraint& c);

}  // namespace stkgqa
