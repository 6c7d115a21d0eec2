#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "journeygen/store.hpp"

namespace jgen {

// Shopper behavior knobs. Defaults target tracked retail baskets: slow
// browsing and dwelling dominate, with short walking bursts between targets.
struct ShopperModel {
    double walk_speed = 1.0;     // m/s cruise speed between targets
    double approach_speed = 0.42;  // m/s over the final stretch of a leg
    double approach_len = 6.5;   // m of deceleration before each stop
    double browse_speed = 0.25;  // m/s scanning the shelf at a target
    double browse_len = 0.8;     // m of shelf scanned before stopping
    // dwell and queue nominals snap to the 5 s sampling grid at segment end;
    // alignment shifts by at most 2.5 s, keeping dwells inside 10-40 s
    std::vector<double> dwell_choices{30.0, 35.0, 37.5};
    std::vector<double> queue_choices{85.0, 95.0, 105.0};
    std::vector<double> pause_choices{10.0};
    double micro_pause_prob = 0.9;  // per long walk leg
    double micro_pause_min_leg = 6.0;  // m
    double locality_scale = 9.0;  // m; list items cluster near earlier picks
    double noise_sigma = 0.2;       // m, per-sample position noise
    double sample_period = 5.0;     // s
    int list_min = 1;
    int list_max = 6;
    double zipf_s = 1.0;            // zone popularity exponent
    double casual_prob = 0.04;      // per traversed non-target zone
    double unvisited_prob = 0.05;   // per journey: item of an unvisited zone
    double min_target_gap = 4.6;    // m between consecutive dwell points
    double start_gap = 600.0;       // s between journey starts
    double base_time = 1.6e9;       // epoch anchor of the first journey
};

// Deterministic preset layouts: 'A' = 61 zones (~30 m footprint),
// 'B' = 41 zones (smaller footprint inside the same 32 m frame).
StoreLayout make_layout(char preset, std::uint64_t seed);

struct GroundTruthItem {
    int journey = -1;  // trajectory index; -1 for orphan transactions
    std::string category;
    int quantity = 1;
    double x = 0.0, y = 0.0;  // planted purchase position (meaningless if excluded)
    // "cluster" | "casual" | "excluded_unvisited" | "excluded_no_zone" | "orphan"
    std::string kind;
};

struct SimResult {
    std::vector<Trajectory> trajectories;
    std::vector<ScannerItem> items;        // shuffled across journeys
    std::vector<GroundTruthItem> truth;    // aligned with items by index
};

// Simulates n shoppers: enter, visit Zipf-popular zones via shortest aisle
// paths, browse and dwell at each target (>= 4 near-stationary samples so
// dwell clustering fires), queue at checkout. Scanner items carry checkout
// timestamps; ground truth is retained for oracle tests.
SimResult simulate_journeys(const StoreLayout& layout, const ShopperModel& shopper, int n,
                            std::uint64_t seed);

void save_ground_truth(const SimResult& sim, const std::string& path);

}  // namespace jgen
