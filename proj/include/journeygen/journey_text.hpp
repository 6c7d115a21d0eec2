#pragma once

#include <string>
#include <vector>

#include "journeygen/spatial_codec.hpp"
#include "journeygen/store.hpp"

namespace jgen {

// A journey in decoded text form: cell codes in chronological order plus
// purchase counts attached to point indices.
struct TextJourney {
    std::vector<std::string> codes;
    std::vector<PurchaseEvent> events;  // sorted by point_index, indices unique
};

struct JourneyParseResult {
    bool ok = false;
    std::vector<std::string> codes;
    std::vector<GridCell> cells;
    std::vector<PurchaseEvent> events;
    int error_token = -1;
    std::string error;
};

// Serializes to one line: "<code><count?> <code><count?> ... ." where counts
// are decimal runs appended with no separator and the line ends with the
// standalone terminator ".".
std::string journey_to_text(const std::vector<std::string>& codes,
                            const std::vector<PurchaseEvent>& events);

// Exact inverse of journey_to_text on valid input; on malformed input reports
// the offending token index (used to score generation validity).
JourneyParseResult parse_journey_text(const std::string& text);

// One journey per line, LF endings.
void build_corpus(const std::vector<TextJourney>& journeys, const std::string& path);
std::string corpus_to_string(const std::vector<TextJourney>& journeys);

}  // namespace jgen
