#include "journeygen/synthstore.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "journeygen/errors.hpp"
#include "journeygen/io_util.hpp"
#include "journeygen/rng.hpp"
#include "journeygen/spatial_codec.hpp"

namespace jgen {

namespace {

struct PresetGeometry {
    double side = 32.0;
    double top_shelf_y0, top_shelf_y1, top_x0, top_x1;
    int wall_zones;
    double zone_strip;  // aisle depth folded into each zone rect
    int n_blocks;
    double block_w, block_x_lo, block_x_hi;
    double block_y0, gap_y0, gap_y1, block_y1;  // two shelf halves per block
    int zones_per_half;
    Rect entrance, checkout;
};

PresetGeometry geometry(char preset) {
    if (preset == 'A') {
        PresetGeometry g;
        g.top_shelf_y0 = 29.5;
        g.top_shelf_y1 = 31.0;
        g.top_x0 = 3.0;
        g.top_x1 = 29.0;
        g.wall_zones = 5;
        g.zone_strip = 2.2;
        g.n_blocks = 7;
        g.block_w = 1.2;
        g.block_x_lo = 3.5;
        g.block_x_hi = 28.5;
        g.block_y0 = 6.0;
        g.gap_y0 = 15.25;
        g.gap_y1 = 16.75;
        g.block_y1 = 26.0;
        g.zones_per_half = 4;
        g.entrance = {2.0, 1.0, 5.0, 3.0};
        g.checkout = {24.0, 1.0, 28.0, 3.5};
        return g;
    }
    if (preset == 'B') {
        PresetGeometry g;
        g.top_shelf_y0 = 26.5;
        g.top_shelf_y1 = 28.0;
        g.top_x0 = 5.0;
        g.top_x1 = 27.0;
        g.wall_zones = 5;
        g.zone_strip = 2.2;
        g.n_blocks = 6;
        g.block_w = 1.2;
        g.block_x_lo = 5.5;
        g.block_x_hi = 26.5;
        g.block_y0 = 8.0;
        g.gap_y0 = 14.75;
        g.gap_y1 = 16.25;
        g.block_y1 = 23.0;
        g.zones_per_half = 3;
        g.entrance = {4.0, 3.5, 7.0, 5.5};
        g.checkout = {21.0, 3.5, 25.0, 6.0};
        return g;
    }
    throw ConfigError(std::string("unknown store preset '") + preset + "' (use A or B)");
}

constexpr int kExpectedZones(char preset) { return preset == 'A' ? 61 : 41; }

}  // namespace

StoreLayout make_layout(char preset, std::uint64_t seed) {
    const PresetGeometry g = geometry(preset);
    StoreLayout layout;
    layout.store_side = g.side;
    layout.entrance = g.entrance;
    layout.checkout = g.checkout;

    // top wall shelf + zones in front of it
    layout.shelves.push_back({g.top_x0, g.top_shelf_y0, g.top_x1, g.top_shelf_y1});
    const double wall_seg = (g.top_x1 - g.top_x0) / g.wall_zones;
    for (int s = 0; s < g.wall_zones; ++s) {
        Zone z;
        z.id = static_cast<int>(layout.zones.size());
        z.rect = {g.top_x0 + s * wall_seg, g.top_shelf_y0 - g.zone_strip,
                  g.top_x0 + (s + 1) * wall_seg, g.top_shelf_y1};
        layout.zones.push_back(z);
    }

    // interior double-faced blocks, two shelf halves each, zones stacked per half
    const double period = (g.block_x_hi - g.block_x_lo - g.block_w) / (g.n_blocks - 1);
    const double half_aisle = (period - g.block_w) / 2.0 - 0.05;
    for (int k = 0; k < g.n_blocks; ++k) {
        const double bx0 = g.block_x_lo + k * period;
        const double bx1 = bx0 + g.block_w;
        const double halves[2][2] = {{g.block_y0, g.gap_y0}, {g.gap_y1, g.block_y1}};
        layout.shelves.push_back({bx0, halves[0][0], bx1, halves[0][1]});
        layout.shelves.push_back({bx0, halves[1][0], bx1, halves[1][1]});
        for (int h = 0; h < 2; ++h) {
            const double seg = (halves[h][1] - halves[h][0]) / g.zones_per_half;
            for (int s = 0; s < g.zones_per_half; ++s) {
                Zone z;
                z.id = static_cast<int>(layout.zones.size());
                z.rect = {bx0 - half_aisle, halves[h][0] + s * seg, bx1 + half_aisle,
                          halves[h][0] + (s + 1) * seg};
                layout.zones.push_back(z);
            }
        }
    }

    if (static_cast<int>(layout.zones.size()) != kExpectedZones(preset))
        throw ConfigError("layout preset produced " + std::to_string(layout.zones.size()) +
                          " zones, expected " + std::to_string(kExpectedZones(preset)));

    // one unique category per zone; the seed permutes the naming
    std::vector<int> perm(layout.zones.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);
    for (std::size_t z = 0; z < layout.zones.size(); ++z)
        layout.zones[z].categories.insert(std::string("cat") + preset + "_" +
                                          std::to_string(perm[z]));

    validate_layout(layout);
    return layout;
}

namespace {

// ---------------------------------------------------------------------------
// walkable grid + breadth-first shortest paths (uniform cost, 4-connected)

struct WalkGrid {
    static constexpr int N = SpatialCodec::kGrid;
    double cell;
    Rect frame;
    std::vector<char> walk;

    bool walkable(int i, int j) const {
        return i >= 0 && j >= 0 && i < N && j < N && walk[j * N + i];
    }
    std::pair<int, int> cell_of(Point2D p) const {
        return {static_cast<int>(p.x / cell), static_cast<int>(p.y / cell)};
    }
    Point2D center(int i, int j) const { return {(i + 0.5) * cell, (j + 0.5) * cell}; }
};

WalkGrid build_grid(const StoreLayout& layout) {
    WalkGrid g;
    g.cell = layout.store_side / WalkGrid::N;
    Rect frame = layout.entrance;
    const auto merge = [&frame](const Rect& r) {
        frame.x0 = std::min(frame.x0, r.x0);
        frame.y0 = std::min(frame.y0, r.y0);
        frame.x1 = std::max(frame.x1, r.x1);
        frame.y1 = std::max(frame.y1, r.y1);
    };
    merge(layout.checkout);
    for (const Zone& z : layout.zones) merge(z.rect);
    g.frame = frame;

    g.walk.assign(WalkGrid::N * WalkGrid::N, 0);
    const double eps = 1e-9;
    for (int j = 0; j < WalkGrid::N; ++j)
        for (int i = 0; i < WalkGrid::N; ++i) {
            const Rect cr{i * g.cell, j * g.cell, (i + 1) * g.cell, (j + 1) * g.cell};
            if (cr.x0 < frame.x0 - eps || cr.y0 < frame.y0 - eps || cr.x1 > frame.x1 + eps ||
                cr.y1 > frame.y1 + eps)
                continue;
            bool blocked = false;
            for (const Rect& s : layout.shelves) {
                const Rect shrunk{s.x0 + eps, s.y0 + eps, s.x1 - eps, s.y1 - eps};
                if (cr.intersects(shrunk)) {
                    blocked = true;
                    break;
                }
            }
            g.walk[j * WalkGrid::N + i] = blocked ? 0 : 1;
        }
    return g;
}

// shortest cell path, deterministic neighbor order; empty when unreachable
std::vector<std::pair<int, int>> bfs_path(const WalkGrid& g, std::pair<int, int> from,
                                          std::pair<int, int> to) {
    constexpr int N = WalkGrid::N;
    if (!g.walkable(from.first, from.second) || !g.walkable(to.first, to.second)) return {};
    std::vector<int> parent(N * N, -1);
    const auto id = [](int i, int j) { return j * N + i; };
    std::deque<std::pair<int, int>> queue{from};
    parent[id(from.first, from.second)] = id(from.first, from.second);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const auto [ci, cj] = queue.front();
        queue.pop_front();
        if (ci == to.first && cj == to.second) break;
        for (int d = 0; d < 4; ++d) {
            const int ni = ci + di[d], nj = cj + dj[d];
            if (!g.walkable(ni, nj) || parent[id(ni, nj)] >= 0) continue;
            parent[id(ni, nj)] = id(ci, cj);
            queue.emplace_back(ni, nj);
        }
    }
    if (parent[id(to.first, to.second)] < 0) return {};
    std::vector<std::pair<int, int>> path;
    int cur = id(to.first, to.second);
    while (true) {
        path.emplace_back(cur % N, cur / N);
        const int p = parent[cur];
        if (p == cur) break;
        cur = p;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// collapse collinear runs of cell centers into waypoints
std::vector<Point2D> path_waypoints(const WalkGrid& g,
                                    const std::vector<std::pair<int, int>>& cells) {
    std::vector<Point2D> out;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const Point2D p = g.center(cells[k].first, cells[k].second);
        if (out.size() >= 2) {
            const Point2D& a = out[out.size() - 2];
            const Point2D& b = out.back();
            const bool collinear = (std::abs((b.x - a.x)) < 1e-12 && std::abs(p.x - b.x) < 1e-12) ||
                                   (std::abs((b.y - a.y)) < 1e-12 && std::abs(p.y - b.y) < 1e-12);
            if (collinear) {
                out.back() = p;
                continue;
            }
        }
        out.push_back(p);
    }
    return out;
}

double polyline_length(const std::vector<Point2D>& pts) {
    double len = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) len += distance(pts[k - 1], pts[k]);
    return len;
}


// ---------------------------------------------------------------------------
// timed movement script

struct Breakpoint {
    double t;
    Point2D p;
};

struct Script {
    std::vector<Breakpoint> bp;

    double now() const { return bp.back().t; }
    Point2D pos() const { return bp.back().p; }

    void start(Point2D p) { bp.push_back({0.0, p}); }

    void move_to(Point2D p, double speed) {
        const double d = distance(pos(), p);
        if (d < 1e-12) return;
        bp.push_back({now() + d / speed, p});
    }

    // stand still so the segment ends on the sampling grid, target duration
    // `nominal` (rounded end, always at least one tick)
    double pause_aligned(double nominal, double period) {
        double end = std::round((now() + nominal) / period) * period;
        if (end <= now() + period / 2) end = (std::floor(now() / period) + 1.0) * period;
        bp.push_back({end, pos()});
        return end;
    }

    Point2D position_at(double t) const {
        if (t <= bp.front().t) return bp.front().p;
        for (std::size_t k = 1; k < bp.size(); ++k) {
            if (t <= bp[k].t) {
                const double span = bp[k].t - bp[k - 1].t;
                const double u = span > 1e-12 ? (t - bp[k - 1].t) / span : 1.0;
                return {bp[k - 1].p.x + u * (bp[k].p.x - bp[k - 1].p.x),
                        bp[k - 1].p.y + u * (bp[k].p.y - bp[k - 1].p.y)};
            }
        }
        return bp.back().p;
    }
};

// walk through waypoints at cruise speed, decelerating over the final
// approach_len meters; pause after the waypoints listed in pause_after
void walk_leg(Script& script, const std::vector<Point2D>& wp, const ShopperModel& m,
              const std::vector<std::size_t>& pause_after, double pause_nominal, double period) {
    std::vector<Point2D> pts{script.pos()};
    pts.insert(pts.end(), wp.begin(), wp.end());
    const double total = polyline_length(pts);
    // never decelerate within the first 3 m: the first post-dwell sample must
    // land far enough away that adjacent dwell clusters stay separate
    const double cruise_until = std::max(3.0, total - m.approach_len);
    double walked = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double len = distance(pts[k - 1], pts[k]);
        if (len > 1e-12) {
            if (walked >= cruise_until) {
                script.move_to(pts[k], m.approach_speed);
            } else if (walked + len <= cruise_until) {
                script.move_to(pts[k], m.walk_speed);
            } else {
                const double u = (cruise_until - walked) / len;
                const Point2D mid{pts[k - 1].x + u * (pts[k].x - pts[k - 1].x),
                                  pts[k - 1].y + u * (pts[k].y - pts[k - 1].y)};
                script.move_to(mid, m.walk_speed);
                script.move_to(pts[k], m.approach_speed);
            }
            walked += len;
        }
        if (std::find(pause_after.begin(), pause_after.end(), k - 1) != pause_after.end())
            script.pause_aligned(pause_nominal, period);
    }
}

// walk a leg, inserting up to two browsing pauses at waypoints well away from
// the leg endpoints (so pause samples cannot chain into dwell clusters)
template <typename RngT>
void walk_leg_with_pauses(Script& script, const std::vector<Point2D>& wp, Point2D dest,
                          const ShopperModel& m, double leg_len, RngT& rng, double period) {
    std::vector<std::size_t> pauses;
    if (leg_len >= m.micro_pause_min_leg && rng.uniform() < m.micro_pause_prob) {
        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k + 1 < wp.size(); ++k)
            if (distance(wp[k], script.pos()) >= 3.0 && distance(wp[k], dest) >= 3.0)
                eligible.push_back(k);
        if (!eligible.empty()) {
            pauses.push_back(eligible[rng.uniform_index(eligible.size())]);
            if (eligible.size() > 1 && leg_len >= 2.0 * m.micro_pause_min_leg &&
                rng.uniform() < m.micro_pause_prob) {
                const std::size_t second = eligible[rng.uniform_index(eligible.size())];
                if (second != pauses[0]) pauses.push_back(second);
            }
        }
    }
    walk_leg(script, wp, m, pauses, m.pause_choices[rng.uniform_index(m.pause_choices.size())],
             period);
}

// service point in the aisle in front of a zone's shelf face, plus the axis
// the shopper browses along
struct ZoneFront {
    Point2D point;
    Point2D axis;
};

std::vector<ZoneFront> zone_fronts(const StoreLayout& layout) {
    std::vector<ZoneFront> fronts(layout.zones.size());
    for (std::size_t z = 0; z < layout.zones.size(); ++z) {
        const Rect& r = layout.zones[z].rect;
        // find the shelf this zone fronts: the shelf overlapping the zone rect
        const Rect* shelf = nullptr;
        for (const Rect& s : layout.shelves)
            if (r.intersects(s)) {
                shelf = &s;
                break;
            }
        if (!shelf) throw ConfigError("zone " + std::to_string(z) + " fronts no shelf");
        if (shelf->height() > shelf->width()) {
            // vertical block: stand on the wider aisle side, alternate by id
            const double left = shelf->x0 - 0.75, right = shelf->x1 + 0.75;
            const double x = (layout.zones[z].id % 2 == 0) ? left : right;
            fronts[z] = {{x, (r.y0 + r.y1) / 2.0}, {0.0, 1.0}};
        } else {
            // wall shelf: stand below it
            fronts[z] = {{(r.x0 + r.x1) / 2.0, shelf->y0 - 0.75}, {1.0, 0.0}};
        }
    }
    return fronts;
}

int pick_weighted(Rng& rng, const std::vector<double>& w) {
    double total = 0.0;
    for (double v : w) total += v;
    double r = rng.uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
        r -= w[i];
        if (r < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
}

}  // namespace

SimResult simulate_journeys(const StoreLayout& layout, const ShopperModel& m, int n,
                            std::uint64_t seed) {
    if (n < 1) throw ConfigError("simulate: n must be >= 1");
    const WalkGrid grid = build_grid(layout);
    const std::vector<ZoneFront> fronts = zone_fronts(layout);
    const Point2D entry_point = layout.entrance.center();
    const Point2D queue_point = layout.checkout.center();

    // every zone front must be reachable from the entrance
    for (std::size_t z = 0; z < layout.zones.size(); ++z)
        if (bfs_path(grid, grid.cell_of(entry_point), grid.cell_of(fronts[z].point)).empty())
            throw ConfigError("zone " + std::to_string(layout.zones[z].id) +
                              " unreachable from entrance");
    if (bfs_path(grid, grid.cell_of(entry_point), grid.cell_of(queue_point)).empty())
        throw ConfigError("checkout unreachable from entrance");

    // planted Zipf zone popularity: rank permutation fixed per dataset
    std::vector<double> popularity(layout.zones.size());
    {
        std::vector<int> rank(layout.zones.size());
        std::iota(rank.begin(), rank.end(), 0);
        Rng prng(derive_seed(seed, 7));
        prng.shuffle(rank);
        for (std::size_t z = 0; z < layout.zones.size(); ++z)
            popularity[z] = 1.0 / std::pow(rank[z] + 1.0, m.zipf_s);
    }

    SimResult sim;
    const double period = m.sample_period;

    for (int jn = 0; jn < n; ++jn) {
        Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(jn)));
        const double start_time = m.base_time + jn * m.start_gap + rng.uniform(0.0, 60.0);

        // shopping list: Zipf-weighted zones without replacement; later picks
        // lean toward zones near the previous pick (related items sit together)
        const int list_size = m.list_min + static_cast<int>(rng.uniform_index(
                                               static_cast<std::uint64_t>(m.list_max - m.list_min + 1)));
        std::vector<int> list;
        {
            std::vector<char> taken(layout.zones.size(), 0);
            for (int s = 0; s < list_size; ++s) {
                std::vector<double> w(layout.zones.size(), 0.0);
                for (std::size_t z = 0; z < w.size(); ++z) {
                    if (taken[z]) continue;
                    w[z] = popularity[z];
                    if (!list.empty())
                        w[z] *= std::exp(-distance(fronts[z].point, fronts[list.back()].point) /
                                         m.locality_scale);
                }
                const int z = pick_weighted(rng, w);
                if (w[z] <= 0.0) break;
                taken[z] = 1;
                list.push_back(z);
            }
        }
        // nearest-neighbor visit order, oriented so the tour flows from the
        // entrance toward the checkout
        std::vector<int> order;
        Point2D cur = entry_point;
        std::vector<int> remaining = list;
        while (!remaining.empty()) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < remaining.size(); ++k)
                if (distance(fronts[remaining[k]].point, cur) <
                    distance(fronts[remaining[best]].point, cur))
                    best = k;
            order.push_back(remaining[best]);
            cur = fronts[remaining[best]].point;
            remaining.erase(remaining.begin() + best);
        }
        if (order.size() >= 2) {
            const double fwd = distance(entry_point, fronts[order.front()].point) +
                               distance(fronts[order.back()].point, queue_point);
            const double rev = distance(entry_point, fronts[order.back()].point) +
                               distance(fronts[order.front()].point, queue_point);
            if (rev < fwd) std::reverse(order.begin(), order.end());
        }
        // drop targets too close to the previous stop (keeps dwell clusters apart)
        std::vector<int> targets;
        cur = entry_point;
        for (int z : order) {
            if (distance(fronts[z].point, cur) >= m.min_target_gap) {
                targets.push_back(z);
                cur = fronts[z].point;
            }
        }

        Script script;
        script.start(entry_point);
        script.pause_aligned(m.pause_choices[rng.uniform_index(m.pause_choices.size())], period);

        struct Dwell {
            int zone;
            double t_end;
            Point2D point;
            int quantity;
        };
        std::vector<Dwell> dwells;

        bool degenerate = false;
        for (int z : targets) {
            // choose the browse side away from the current position
            const Point2D axis = fronts[z].axis;
            const Point2D fp = fronts[z].point;
            const double side_dot = (fp.x - script.pos().x) * axis.x + (fp.y - script.pos().y) * axis.y;
            const double sign = side_dot >= 0.0 ? 1.0 : -1.0;
            const Point2D browse_start{fp.x + sign * m.browse_len * axis.x,
                                       fp.y + sign * m.browse_len * axis.y};

            const auto cells =
                bfs_path(grid, grid.cell_of(script.pos()), grid.cell_of(browse_start));
            if (cells.empty()) {
                degenerate = true;
                break;
            }
            std::vector<Point2D> wp = path_waypoints(grid, cells);
            wp.push_back(browse_start);
            const double leg_len = polyline_length(wp) + distance(script.pos(), wp.front());
            if (leg_len < 5.5) continue;  // too close; skip to keep clusters separable

            walk_leg_with_pauses(script, wp, fp, m, leg_len, rng, period);
            script.move_to(fp, m.browse_speed);
            const double dwell_nominal =
                m.dwell_choices[rng.uniform_index(m.dwell_choices.size())];
            const double t_end = script.pause_aligned(dwell_nominal, period);

            const double qr = rng.uniform();
            const int qty = qr < 0.65 ? 1 : (qr < 0.90 ? 2 : 3);
            dwells.push_back({z, t_end, fp, qty});
        }
        if (degenerate) throw ConfigError("journey could not route between zones");

        // to checkout
        {
            const auto cells = bfs_path(grid, grid.cell_of(script.pos()), grid.cell_of(queue_point));
            if (cells.empty()) throw ConfigError("checkout unreachable mid-journey");
            std::vector<Point2D> wp = path_waypoints(grid, cells);
            wp.push_back(queue_point);
            walk_leg_with_pauses(script, wp, queue_point, m, polyline_length(wp), rng, period);
            script.pause_aligned(m.queue_choices[rng.uniform_index(m.queue_choices.size())],
                                 period);
        }

        // sample at the tick grid, add noise, keep samples off shelves
        const double t_total = script.now();
        Trajectory traj;
        {
            std::ostringstream id;
            id << "c" << std::setw(6) << std::setfill('0') << jn;
            traj.customer_id = id.str();
        }
        const int n_samples = static_cast<int>(std::llround(t_total / period)) + 1;
        for (int k = 0; k < n_samples; ++k) {
            const double t = k * period;
            Point2D p = script.position_at(t);
            p.x += rng.normal(0.0, m.noise_sigma);
            p.y += rng.normal(0.0, m.noise_sigma);
            // project out of any shelf, then clamp to the walkable frame
            for (const Rect& s : layout.shelves) {
                if (!s.contains(p)) continue;
                const double dl = p.x - s.x0, dr = s.x1 - p.x, db = p.y - s.y0, dt = s.y1 - p.y;
                const double mn = std::min({dl, dr, db, dt});
                if (mn == dl)
                    p.x = s.x0 - 0.02;
                else if (mn == dr)
                    p.x = s.x1 + 0.02;
                else if (mn == db)
                    p.y = s.y0 - 0.02;
                else
                    p.y = s.y1 + 0.02;
                break;
            }
            p.x = std::clamp(p.x, grid.frame.x0 + 0.02, grid.frame.x1 - 0.02);
            p.y = std::clamp(p.y, grid.frame.y0 + 0.02, grid.frame.y1 - 0.02);
            traj.points.push_back({t, p.x, p.y});
        }
        // the journey starts at the entrance and ends inside the checkout area
        {
            TimedPoint& first = traj.points.front();
            first.x = std::clamp(first.x, layout.entrance.x0 + 0.05, layout.entrance.x1 - 0.05);
            first.y = std::clamp(first.y, layout.entrance.y0 + 0.05, layout.entrance.y1 - 0.05);
            TimedPoint& last = traj.points.back();
            last.x = std::clamp(last.x, layout.checkout.x0 + 0.05, layout.checkout.x1 - 0.05);
            last.y = std::clamp(last.y, layout.checkout.y0 + 0.05, layout.checkout.y1 - 0.05);
        }
        traj.checkout_time = start_time + t_total;

        const auto category_of = [&](int z) { return *layout.zones[z].categories.begin(); };

        // dwell purchases
        for (const Dwell& d : dwells) {
            sim.items.push_back({traj.checkout_time, category_of(d.zone), d.quantity});
            sim.truth.push_back(
                {jn, category_of(d.zone), d.quantity, d.point.x, d.point.y, "cluster"});
        }

        // casual purchases from traversed non-target zones
        std::vector<char> is_target(layout.zones.size(), 0);
        for (const Dwell& d : dwells) is_target[d.zone] = 1;
        std::vector<char> visited(layout.zones.size(), 0);
        std::vector<int> first_sample_in(layout.zones.size(), -1);
        for (int k = 0; k < static_cast<int>(traj.points.size()); ++k) {
            const Point2D p{traj.points[k].x, traj.points[k].y};
            for (std::size_t z = 0; z < layout.zones.size(); ++z) {
                if (layout.zones[z].rect.contains(p)) {
                    visited[z] = 1;
                    if (first_sample_in[z] < 0) first_sample_in[z] = k;
                }
            }
        }
        for (std::size_t z = 0; z < layout.zones.size(); ++z) {
            if (is_target[z] || !visited[z]) continue;
            if (rng.uniform() >= m.casual_prob) continue;
            const TimedPoint& sp = traj.points[first_sample_in[z]];
            sim.items.push_back({traj.checkout_time, category_of(static_cast<int>(z)), 1});
            sim.truth.push_back(
                {jn, category_of(static_cast<int>(z)), 1, sp.x, sp.y, "casual"});
        }

        // items whose zone was never traversed (end-cap purchases in the paper)
        if (rng.uniform() < m.unvisited_prob) {
            std::vector<int> unvisited;
            for (std::size_t z = 0; z < layout.zones.size(); ++z)
                if (!visited[z]) unvisited.push_back(static_cast<int>(z));
            if (!unvisited.empty()) {
                const int z = unvisited[rng.uniform_index(unvisited.size())];
                sim.items.push_back({traj.checkout_time, category_of(z), 1});
                sim.truth.push_back({jn, category_of(z), 1, 0.0, 0.0, "excluded_unvisited"});
            }
        }
        sim.trajectories.push_back(std::move(traj));
    }

    // orphan transactions far outside any matching window
    for (int k = 0; k < 2; ++k) {
        sim.items.push_back(
            {m.base_time - 86400.0 - k * 600.0, *layout.zones[0].categories.begin(), 1});
        sim.truth.push_back({-1, *layout.zones[0].categories.begin(), 1, 0.0, 0.0, "orphan"});
    }

    // shuffle items across journeys, keeping truth aligned
    std::vector<std::size_t> perm(sim.items.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng srng(derive_seed(seed, 0xffffu));
    srng.shuffle(perm);
    std::vector<ScannerItem> items(sim.items.size());
    std::vector<GroundTruthItem> truth(sim.truth.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        items[k] = sim.items[perm[k]];
        truth[k] = sim.truth[perm[k]];
    }
    sim.items = std::move(items);
    sim.truth = std::move(truth);
    return sim;
}

void save_ground_truth(const SimResult& sim, const std::string& path) {
    std::ostringstream out;
    for (std::size_t k = 0; k < sim.truth.size(); ++k) {
        const GroundTruthItem& t = sim.truth[k];
        nlohmann::json j{{"item", k},         {"journey", t.journey}, {"category", t.category},
                         {"quantity", t.quantity}, {"x", t.x},        {"y", t.y},
                         {"kind", t.kind}};
        out << j.dump() << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace jgen
