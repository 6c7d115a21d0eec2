#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "journeygen/geometry.hpp"

namespace jgen {

// A zone is a floor region of the layout diagram carrying product categories.
// Zone rects cover the shelf plus the aisle strip customers stand in, so
// trajectory points "in front of" a shelf fall inside the zone.
struct Zone {
    int id = 0;
    Rect rect;
    std::set<std::string> categories;
};

struct StoreLayout {
    double store_side = 32.0;
    std::vector<Zone> zones;
    Rect entrance;
    Rect checkout;
    // Physical shelf blocks (impassable). Optional in the file format; the
    // synthetic simulator emits them so walkability is reconstructible.
    std::vector<Rect> shelves;

    // index of the first zone containing p, or -1
    int zone_at(Point2D p) const {
        for (std::size_t z = 0; z < zones.size(); ++z)
            if (zones[z].rect.contains(p)) return static_cast<int>(z);
        return -1;
    }

    bool in_shelf(Point2D p) const {
        for (const Rect& s : shelves)
            if (s.contains(p)) return true;
        return false;
    }
};

// Validates invariants (unique ids, rects within bounds) and throws
// DataFormatError on violation.
void validate_layout(const StoreLayout& layout);

std::string layout_to_json(const StoreLayout& layout);
StoreLayout layout_from_json(const std::string& text);
void save_layout(const StoreLayout& layout, const std::string& path);
StoreLayout load_layout(const std::string& path);

std::uint64_t layout_hash(const StoreLayout& layout);

// One tracked basket position. t is seconds from journey start.
struct TimedPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Trajectory {
    std::string customer_id;
    std::vector<TimedPoint> points;
    double checkout_time = 0.0;  // absolute epoch seconds of the last sample
};

struct ScannerItem {
    double txn_time = 0.0;  // absolute epoch seconds
    std::string category;
    int quantity = 1;
};

// A purchase localized to one trajectory sample; count aggregates items.
struct PurchaseEvent {
    int point_index = 0;
    int count = 1;
    bool operator==(const PurchaseEvent&) const = default;
};

// Trajectory file: CSV "customer_id,t,x,y", one sample per line, samples of
// one journey contiguous and time-ordered. t is absolute epoch seconds in the
// file; in memory points are journey-relative and checkout_time keeps the
// absolute anchor.
void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path);
std::vector<Trajectory> load_trajectories(const std::string& path);

// Scanner file: CSV "txn_time,category,quantity".
void save_scanner_items(const std::vector<ScannerItem>& items, const std::string& path);
std::vector<ScannerItem> load_scanner_items(const std::string& path);

}  // namespace jgen
