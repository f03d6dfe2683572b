#pragma once

#include <cstdint>

namespace stkgqa {

// Year granularity throughout; the permitted global span is configured at
// parse time (default 1..4000).
struct TimeInterval {
    int start = 0;
    int end = 0;

    bool operator==(const TimeInterval&) const = default;
};

inline bool valid_interval(const TimeInterval& t) { return t.start <= t.end; }

enum class TemporalKind : uint8_t { Before, After, During };

const char* temporal_kind_name(TemporalKind k);

// Before/After are strict one-sided comparisons: equality of the compared
// timestamps is unsatisfied. During is inclusive containment of the
// candidate inside the clue span.
inline bool eval_temporal(const TimeInterval& candidate, TemporalKind kind,
                          const TimeInterval& clue) {
    switch (kind) {
        case TemporalKind::Before: return candidate.end < clue.start;
        case TemporalKind::After: return candidate.start > clue.end;
        case TemporalKind::During:
            return clue.start <= candidate.start && candidate.end <= clue.end;
    }
    return false;
}

}  // namespace stkgqa
