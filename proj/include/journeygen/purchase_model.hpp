#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "journeygen/dbscan.hpp"
#include "journeygen/journey_text.hpp"
#include "journeygen/store.hpp"

namespace jgen {

// Trajectory samples embedded in xyt space: (x, y, 0.1 * t), 1 s = 0.1 m.
std::vector<Vec3> xyt_embed(const Trajectory& traj);

inline constexpr double kXytSecondsToMeters = 0.1;
inline constexpr double kMatchWindowSeconds = 120.0;

struct TransactionMatch {
    // item indices attached to each trajectory, in scanner order
    std::vector<std::vector<int>> items_per_traj;
    std::vector<int> unmatched;  // item indices with no checkout within the window
    int ties = 0;                // equidistant pairs resolved toward the earlier checkout
};

// Attaches each scanner item to the trajectory whose checkout_time is nearest
// within +-window seconds; equidistant candidates resolve to the earlier
// checkout_time.
TransactionMatch match_transactions(const std::vector<Trajectory>& trajs,
                                    const std::vector<ScannerItem>& items,
                                    double window = kMatchWindowSeconds);

enum class ExclusionReason {
    kCategoryNotInLayout,  // no zone carries the category
    kZoneNotVisited,       // candidate zones never traversed (end cap / seasonal)
};

struct ExcludedItem {
    ScannerItem item;
    ExclusionReason reason;
};

struct LocatedPurchases {
    std::vector<PurchaseEvent> events;  // sorted by point_index, merged counts
    std::vector<ExcludedItem> excluded;
};

// Localizes each purchased item (expanded by quantity) onto one trajectory
// point:
//  1. candidate zones = zones whose categories contain the item category;
//  2. if a DBSCAN cluster has points inside a candidate zone, the cluster
//     with the most in-zone points wins (tie: earliest cluster) and the
//     purchase lands on the cluster's last point in time;
//  3. otherwise a uniformly random traversed point of the earliest-traversed
//     candidate zone is chosen (seeded);
//  4. otherwise the item is excluded.
LocatedPurchases locate_purchases(const Trajectory& traj, const std::vector<int>& labels,
                                  const std::vector<ScannerItem>& items,
                                  const StoreLayout& layout, std::uint64_t seed);

struct PipelineOptions {
    double eps = 2.5;
    int min_pts = 4;
    double match_window = kMatchWindowSeconds;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    std::vector<TextJourney> journeys;            // one per trajectory, in order
    std::vector<LocatedPurchases> located;        // per trajectory
    long matched_quantity = 0;
    long event_quantity = 0;
    long excluded_quantity = 0;
    long unmatched_items = 0;
};

// Full raw-data path: match scanner items to trajectories, cluster dwells,
// localize purchases, and textualize every journey with the given codec.
PipelineResult annotate_journeys(const std::vector<Trajectory>& trajs,
                                 const std::vector<ScannerItem>& items,
                                 const StoreLayout& layout, const SpatialCodec& codec,
                                 const PipelineOptions& opts);

}  // namespace jgen
