#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "journeygen/journey_text.hpp"
#include "journeygen/spatial_codec.hpp"
#include "journeygen/store.hpp"

namespace jgen {

// A journey reduced to grid cells plus purchase events, the common currency
// of evaluation (both reference corpora and generated text decode to this).
struct CellJourney {
    std::vector<GridCell> cells;
    std::vector<PurchaseEvent> events;
};

CellJourney to_cell_journey(const JourneyParseResult& parsed);
std::vector<CellJourney> decode_corpus_lines(const std::vector<std::string>& lines);

// 64x64 visit counts over the half-meter grid.
struct Heatmap {
    static constexpr int kGrid = SpatialCodec::kGrid;
    std::vector<long> counts = std::vector<long>(kGrid * kGrid, 0);

    long& at(int i, int j) { return counts[j * kGrid + i]; }
    long at(int i, int j) const { return counts[j * kGrid + i]; }
    long total() const;
    std::vector<double> distribution() const;  // flattened, normalized
};

// Visit counts over n_sample journeys drawn without replacement (all of them,
// with a warning flag, when the population is smaller).
struct HeatmapResult {
    Heatmap map;
    int sampled = 0;
    bool population_smaller_than_requested = false;
};

HeatmapResult traffic_heatmap(const std::vector<CellJourney>& journeys, int n_sample,
                              std::uint64_t seed);

std::string heatmap_to_text(const Heatmap& h);
// 8-bit grayscale portable graymap, max count = white
std::string heatmap_to_pgm(const Heatmap& h);

// Per-zone purchase counts normalized to a probability vector. The last entry
// is the reserved "unzoned" bucket for purchase points in no zone.
struct ZoneDistribution {
    std::vector<double> probs;       // zones in layout order + unzoned bucket
    std::vector<long> counts;        // same layout, unnormalized
    std::vector<double> per_visit;   // purchases per journey per zone (+ unzoned)
    long journeys = 0;
    bool all_zero = false;
};

ZoneDistribution zone_purchase_distribution(const std::vector<CellJourney>& journeys,
                                            const StoreLayout& layout,
                                            const SpatialCodec& codec);

// Jensen-Shannon divergence, log base 2, in [0, 1]; 0 iff p == q.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

struct StepStats {
    long steps = 0;
    long within_walkable = 0;  // displacement <= threshold
    double threshold = 2.5;
    double fraction_within() const { return steps > 0 ? static_cast<double>(within_walkable) / steps : 0.0; }
};

StepStats step_displacement_stats(const std::vector<CellJourney>& journeys,
                                  const SpatialCodec& codec, double threshold = 2.5);

struct EvalReport {
    Heatmap heat_generated, heat_reference;
    ZoneDistribution zones_generated, zones_reference;
    double zone_js = 0.0;
    double heatmap_js = 0.0;
    double validity_rate = 1.0;  // callers with parse stats may override
    StepStats steps_generated;
    long n_generated = 0, n_reference = 0;
};

EvalReport compare_report(const std::vector<CellJourney>& generated,
                          const std::vector<CellJourney>& reference, const StoreLayout& layout,
                          const SpatialCodec& codec, int heatmap_samples = 2000,
                          std::uint64_t seed = 0);

std::string report_to_json(const EvalReport& r);
std::string zone_table_csv(const EvalReport& r, const StoreLayout& layout);

}  // namespace jgen
