#include "journeygen/purchase_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "journeygen/errors.hpp"
#include "journeygen/rng.hpp"

namespace jgen {

std::vector<Vec3> xyt_embed(const Trajectory& traj) {
    std::vector<Vec3> out;
    out.reserve(traj.points.size());
    for (const TimedPoint& p : traj.points)
        out.push_back({p.x, p.y, kXytSecondsToMeters * p.t});
    return out;
}

TransactionMatch match_transactions(const std::vector<Trajectory>& trajs,
                                    const std::vector<ScannerItem>& items, double window) {
    TransactionMatch m;
    m.items_per_traj.resize(trajs.size());

    std::vector<int> order(trajs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (trajs[a].checkout_time != trajs[b].checkout_time)
            return trajs[a].checkout_time < trajs[b].checkout_time;
        return a < b;
    });
    std::vector<double> times(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) times[k] = trajs[order[k]].checkout_time;

    for (int ii = 0; ii < static_cast<int>(items.size()); ++ii) {
        const double t = items[ii].txn_time;
        int best = -1;
        if (!times.empty()) {
            const auto it = std::lower_bound(times.begin(), times.end(), t);
            const long hi = it - times.begin();
            const long lo = hi - 1;
            double best_d = window + 1.0;
            // scan lo then hi so an exact tie keeps the earlier checkout
            for (long k : {lo, hi}) {
                if (k < 0 || k >= static_cast<long>(times.size())) continue;
                const double d = std::abs(times[k] - t);
                if (d < best_d) {
                    best_d = d;
                    best = order[k];
                } else if (d == best_d && best >= 0) {
                    ++m.ties;
                }
            }
            if (best_d > window) best = -1;
        }
        if (best < 0)
            m.unmatched.push_back(ii);
        else
            m.items_per_traj[best].push_back(ii);
    }
    return m;
}

namespace {

struct Cluster {
    int first = 0;  // lowest point index
    int last = 0;   // highest point index == last in time
    std::vector<int> points;
};

}  // namespace

LocatedPurchases locate_purchases(const Trajectory& traj, const std::vector<int>& labels,
                                  const std::vector<ScannerItem>& items,
                                  const StoreLayout& layout, std::uint64_t seed) {
    if (labels.size() != traj.points.size())
        throw ConfigError("locate_purchases: labels/points size mismatch");

    std::map<int, Cluster> clusters;
    for (int p = 0; p < static_cast<int>(labels.size()); ++p) {
        if (labels[p] < 0) continue;
        auto [it, fresh] = clusters.try_emplace(labels[p]);
        if (fresh) it->second.first = p;
        it->second.last = p;
        it->second.points.push_back(p);
    }

    // in-zone point indices per zone, computed lazily
    std::vector<std::vector<int>> zone_points(layout.zones.size());
    std::vector<bool> zone_points_done(layout.zones.size(), false);
    const auto points_in_zone = [&](int z) -> const std::vector<int>& {
        if (!zone_points_done[z]) {
            for (int p = 0; p < static_cast<int>(traj.points.size()); ++p)
                if (layout.zones[z].rect.contains({traj.points[p].x, traj.points[p].y}))
                    zone_points[z].push_back(p);
            zone_points_done[z] = true;
        }
        return zone_points[z];
    };

    Rng rng(seed);
    std::map<int, int> count_at;
    LocatedPurchases out;

    for (const ScannerItem& item : items) {
        std::vector<int> candidates;
        for (int z = 0; z < static_cast<int>(layout.zones.size()); ++z)
            if (layout.zones[z].categories.count(item.category)) candidates.push_back(z);
        if (candidates.empty()) {
            out.excluded.push_back({item, ExclusionReason::kCategoryNotInLayout});
            continue;
        }

        // rule 2: best (cluster, zone) by in-zone point count, tie -> earliest cluster
        int best_cluster = -1, best_count = 0, best_first = 0;
        for (int z : candidates) {
            const std::vector<int>& zp = points_in_zone(z);
            if (zp.empty()) continue;
            std::map<int, int> per_cluster;
            for (int p : zp)
                if (labels[p] >= 0) ++per_cluster[labels[p]];
            for (const auto& [cid, cnt] : per_cluster) {
                const int first = clusters.at(cid).first;
                if (cnt > best_count || (cnt == best_count && best_cluster >= 0 &&
                                         first < best_first)) {
                    best_cluster = cid;
                    best_count = cnt;
                    best_first = first;
                }
            }
        }
        if (best_cluster >= 0) {
            count_at[clusters.at(best_cluster).last] += item.quantity;
            continue;
        }

        // rule 3: earliest-traversed candidate zone, uniform random in-zone point
        int zone_pick = -1, zone_first = 0;
        for (int z : candidates) {
            const std::vector<int>& zp = points_in_zone(z);
            if (zp.empty()) continue;
            if (zone_pick < 0 || zp.front() < zone_first) {
                zone_pick = z;
                zone_first = zp.front();
            }
        }
        if (zone_pick >= 0) {
            const std::vector<int>& zp = points_in_zone(zone_pick);
            for (int q = 0; q < item.quantity; ++q)
                ++count_at[zp[rng.uniform_index(zp.size())]];
            continue;
        }

        out.excluded.push_back({item, ExclusionReason::kZoneNotVisited});
    }

    for (const auto& [idx, cnt] : count_at) out.events.push_back({idx, cnt});
    return out;
}

PipelineResult annotate_journeys(const std::vector<Trajectory>& trajs,
                                 const std::vector<ScannerItem>& items,
                                 const StoreLayout& layout, const SpatialCodec& codec,
                                 const PipelineOptions& opts) {
    const TransactionMatch match = match_transactions(trajs, items, opts.match_window);
    PipelineResult out;
    out.unmatched_items = static_cast<long>(match.unmatched.size());

    for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
        const Trajectory& traj = trajs[ti];
        std::vector<ScannerItem> mine;
        for (int ii : match.items_per_traj[ti]) {
            mine.push_back(items[ii]);
            out.matched_quantity += items[ii].quantity;
        }
        const std::vector<int> labels = dbscan(xyt_embed(traj), opts.eps, opts.min_pts);
        LocatedPurchases located =
            locate_purchases(traj, labels, mine, layout, derive_seed(opts.seed, ti));
        for (const PurchaseEvent& e : located.events) out.event_quantity += e.count;
        for (const ExcludedItem& e : located.excluded) out.excluded_quantity += e.item.quantity;

        TextJourney tj;
        tj.codes.reserve(traj.points.size());
        for (const TimedPoint& p : traj.points)
            tj.codes.push_back(codec.encode_location({p.x, p.y}));
        tj.events = located.events;
        out.journeys.push_back(std::move(tj));
        out.located.push_back(std::move(located));
    }
    return out;
}

}  // namespace jgen
