#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <journeygen/purchase_model.hpp>

using namespace jgen;

namespace {

Trajectory make_traj(std::vector<TimedPoint> pts, double checkout_time = 0.0) {
    Trajectory t;
    t.customer_id = "c0";
    t.points = std::move(pts);
    t.checkout_time = checkout_time;
    return t;
}

StoreLayout two_zone_layout() {
    StoreLayout layout;
    layout.store_side = 32.0;
    Zone a;
    a.id = 0;
    a.rect = {0.0, 0.0, 4.0, 4.0};
    a.categories = {"soap"};
    Zone b;
    b.id = 1;
    b.rect = {10.0, 10.0, 14.0, 14.0};
    b.categories = {"tea"};
    layout.zones = {a, b};
    layout.entrance = {0.0, 0.0, 1.0, 1.0};
    layout.checkout = {30.0, 0.0, 32.0, 1.0};
    return layout;
}

}  // namespace

TEST_CASE("xyt embedding scales time by 0.1") {
    const Trajectory t = make_traj({{0.0, 1.0, 2.0}, {5.0, 1.0, 2.0}, {60.0, 0.0, 0.0}});
    const std::vector<Vec3> e = xyt_embed(t);
    REQUIRE(e.size() == 3);
    CHECK(e[0] == Vec3{1.0, 2.0, 0.0});
    CHECK(e[1] == Vec3{1.0, 2.0, 0.5});
    CHECK(e[2] == Vec3{0.0, 0.0, 6.0});
}

TEST_CASE("transaction matching within the window") {
    std::vector<Trajectory> trajs;
    trajs.push_back(make_traj({{0, 1, 1}, {5, 2, 2}}, 1000.0));
    trajs.push_back(make_traj({{0, 1, 1}, {5, 2, 2}}, 2000.0));

    SUBCASE("nearby item matches") {
        const TransactionMatch m = match_transactions(trajs, {{1003.0, "soap", 1}});
        CHECK(m.items_per_traj[0] == std::vector<int>{0});
        CHECK(m.unmatched.empty());
    }
    SUBCASE("item outside +-120 s stays unmatched") {
        const TransactionMatch m = match_transactions(trajs, {{1600.0, "soap", 1}});
        CHECK(m.unmatched == std::vector<int>{0});
    }
    SUBCASE("equidistant tie goes to the earlier checkout") {
        std::vector<Trajectory> close_pair;
        close_pair.push_back(make_traj({{0, 1, 1}, {5, 2, 2}}, 1000.0));
        close_pair.push_back(make_traj({{0, 1, 1}, {5, 2, 2}}, 1100.0));
        const TransactionMatch m = match_transactions(close_pair, {{1050.0, "soap", 1}});
        CHECK(m.unmatched.empty());
        CHECK(m.items_per_traj[0] == std::vector<int>{0});
        CHECK(m.ties == 1);
    }
    SUBCASE("boundary: exactly 120 s away still matches") {
        const TransactionMatch m = match_transactions(trajs, {{1120.0, "soap", 1}});
        CHECK(m.items_per_traj[0] == std::vector<int>{0});
    }
}

TEST_CASE("locate: cluster rule picks the cluster's last point in time") {
    // five samples dwelling inside zone 0, then movement away
    Trajectory t = make_traj({{0, 1.0, 1.0},
                              {5, 1.1, 1.0},
                              {10, 1.0, 1.1},
                              {15, 1.1, 1.1},
                              {20, 1.05, 1.0},
                              {25, 8.0, 8.0},
                              {30, 12.0, 12.0}});
    const std::vector<int> labels = dbscan(xyt_embed(t), 2.5, 4);
    REQUIRE(labels[0] >= 0);
    const LocatedPurchases lp =
        locate_purchases(t, labels, {{0.0, "soap", 2}}, two_zone_layout(), 1);
    REQUIRE(lp.events.size() == 1);
    CHECK(lp.events[0].point_index == 4);  // last clustered sample
    CHECK(lp.events[0].count == 2);
    CHECK(lp.excluded.empty());
}

TEST_CASE("locate: traversal without a cluster picks a seeded random in-zone point") {
    // pass through zone 1 without dwelling
    Trajectory t = make_traj({{0, 1.0, 1.0},
                              {5, 6.0, 6.0},
                              {10, 11.0, 11.0},
                              {15, 12.5, 12.5},
                              {20, 20.0, 20.0}});
    const std::vector<int> labels(t.points.size(), -1);
    const StoreLayout layout = two_zone_layout();
    const LocatedPurchases a = locate_purchases(t, labels, {{0.0, "tea", 1}}, layout, 7);
    REQUIRE(a.events.size() == 1);
    CHECK((a.events[0].point_index == 2 || a.events[0].point_index == 3));
    // deterministic given the seed
    const LocatedPurchases b = locate_purchases(t, labels, {{0.0, "tea", 1}}, layout, 7);
    CHECK(a.events == b.events);
}

TEST_CASE("locate: unvisited zone and unknown category are excluded with reasons") {
    Trajectory t = make_traj({{0, 20.0, 20.0}, {5, 21.0, 21.0}});
    const std::vector<int> labels(t.points.size(), -1);
    const LocatedPurchases lp = locate_purchases(
        t, labels, {{0.0, "tea", 1}, {0.0, "unknown_cat", 3}}, two_zone_layout(), 1);
    CHECK(lp.events.empty());
    REQUIRE(lp.excluded.size() == 2);
    CHECK(lp.excluded[0].reason == ExclusionReason::kZoneNotVisited);
    CHECK(lp.excluded[1].reason == ExclusionReason::kCategoryNotInLayout);
}

TEST_CASE("locate: events at one index merge and conservation holds") {
    Trajectory t = make_traj({{0, 1.0, 1.0},
                              {5, 1.1, 1.0},
                              {10, 1.0, 1.1},
                              {15, 1.1, 1.1},
                              {20, 1.05, 1.0}});
    const std::vector<int> labels = dbscan(xyt_embed(t), 2.5, 4);
    const std::vector<ScannerItem> items{{0.0, "soap", 1}, {0.0, "soap", 2}, {0.0, "tea", 1}};
    const LocatedPurchases lp = locate_purchases(t, labels, items, two_zone_layout(), 3);
    REQUIRE(lp.events.size() == 1);
    CHECK(lp.events[0].count == 3);
    long excluded_qty = 0;
    for (const ExcludedItem& e : lp.excluded) excluded_qty += e.item.quantity;
    long event_qty = 0;
    for (const PurchaseEvent& e : lp.events) event_qty += e.count;
    CHECK(event_qty + excluded_qty == 4);
}
