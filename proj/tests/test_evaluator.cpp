#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <journeygen/evaluator.hpp>
#include <journeygen/synthstore.hpp>

using namespace jgen;

TEST_CASE("js divergence: identity, disjoint support, symmetry, bounds") {
    CHECK(js_divergence({0.3, 0.7}, {0.3, 0.7}) == 0.0);
    CHECK(js_divergence({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> p{0.2, 0.5, 0.3}, q{0.6, 0.1, 0.3};
    CHECK(js_divergence(p, q) == doctest::Approx(js_divergence(q, p)).epsilon(1e-15));
    CHECK(js_divergence(p, q) > 0.0);
    CHECK(js_divergence(p, q) <= 1.0);
}

TEST_CASE("js divergence matches the direct scalar evaluation") {
    // independent evaluation of the defining sums for (0.5,0.5) vs (0.9,0.1)
    const double m0 = 0.5 * (0.5 + 0.9), m1 = 0.5 * (0.5 + 0.1);
    const double kl_p = 0.5 * std::log2(0.5 / m0) + 0.5 * std::log2(0.5 / m1);
    const double kl_q = 0.9 * std::log2(0.9 / m0) + 0.1 * std::log2(0.1 / m1);
    const double want = 0.5 * kl_p + 0.5 * kl_q;
    CHECK(js_divergence({0.5, 0.5}, {0.9, 0.1}) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("js divergence rejects bad input") {
    CHECK_THROWS(static_cast<void>(js_divergence({1.0}, {0.5, 0.5})));
    CHECK_THROWS(static_cast<void>(js_divergence({-0.1, 1.1}, {0.5, 0.5})));
}

TEST_CASE("heatmap: mass conservation and additivity") {
    CellJourney a{{{0, 0}, {1, 0}, {1, 1}}, {}};
    CellJourney b{{{5, 5}}, {}};
    const HeatmapResult h = traffic_heatmap({a, b}, 100, 1);
    CHECK(h.population_smaller_than_requested);
    CHECK(h.map.total() == 4);
    CHECK(h.map.at(1, 0) == 1);
    CHECK(h.map.at(5, 5) == 1);

    const HeatmapResult ha = traffic_heatmap({a}, 10, 1);
    const HeatmapResult hb = traffic_heatmap({b}, 10, 1);
    CHECK(ha.map.total() + hb.map.total() == h.map.total());
}

TEST_CASE("heatmap sampling without replacement is seeded") {
    std::vector<CellJourney> js;
    for (int k = 0; k < 50; ++k) js.push_back({{{k % 64, k / 8}}, {}});
    const HeatmapResult a = traffic_heatmap(js, 20, 9);
    const HeatmapResult b = traffic_heatmap(js, 20, 9);
    CHECK(a.map.counts == b.map.counts);
    CHECK(a.map.total() == 20);
    CHECK(a.sampled == 20);
}

TEST_CASE("zone distribution: flags, indicator case and unzoned bucket") {
    const SpatialCodec codec;
    StoreLayout layout;
    layout.store_side = 32.0;
    Zone z0;
    z0.id = 0;
    z0.rect = {0.0, 0.0, 4.0, 4.0};
    z0.categories = {"a"};
    Zone z1;
    z1.id = 1;
    z1.rect = {10.0, 10.0, 14.0, 14.0};
    z1.categories = {"b"};
    layout.zones = {z0, z1};
    layout.entrance = {0, 0, 1, 1};
    layout.checkout = {31, 0, 32, 1};

    SUBCASE("no purchases -> all zero, flagged") {
        const ZoneDistribution d =
            zone_purchase_distribution({{{{1, 1}, {2, 2}}, {}}}, layout, codec);
        CHECK(d.all_zero);
        for (double p : d.probs) CHECK(p == 0.0);
    }
    SUBCASE("all purchases in one zone -> indicator") {
        // cell (2,2) center (1.25,1.25) inside zone 0
        const ZoneDistribution d =
            zone_purchase_distribution({{{{2, 2}}, {{0, 3}}}}, layout, codec);
        CHECK(d.probs[0] == doctest::Approx(1.0));
        CHECK(d.counts[0] == 3);
        CHECK(d.probs[1] == 0.0);
    }
    SUBCASE("purchase in no zone lands in the reserved bucket") {
        // cell (40,40) center (20.25,20.25) outside both zones
        const ZoneDistribution d =
            zone_purchase_distribution({{{{40, 40}}, {{0, 2}}}}, layout, codec);
        CHECK(d.counts.back() == 2);
        CHECK(d.probs.back() == doctest::Approx(1.0));
    }
    SUBCASE("per-visit rates divide by journey count") {
        const ZoneDistribution d = zone_purchase_distribution(
            {{{{2, 2}}, {{0, 3}}}, {{{2, 2}}, {}}}, layout, codec);
        CHECK(d.per_visit[0] == doctest::Approx(1.5));
    }
}

TEST_CASE("step displacement stats") {
    const SpatialCodec codec;
    // (0,0)->(1,0): 0.5 m; (1,0)->(20,0): 9.5 m
    const StepStats s = step_displacement_stats({{{{0, 0}, {1, 0}, {20, 0}}, {}}}, codec);
    CHECK(s.steps == 2);
    CHECK(s.within_walkable == 1);
    CHECK(s.fraction_within() == doctest::Approx(0.5));
}

TEST_CASE("compare_report: self-comparison gives zero divergences") {
    const SpatialCodec codec;
    const StoreLayout layout = make_layout('A', 1);
    std::vector<CellJourney> js;
    for (int k = 0; k < 20; ++k)
        js.push_back({{{2 + k, 10}, {3 + k, 10}, {3 + k, 11}}, {{1, 1 + k % 2}}});
    const EvalReport r = compare_report(js, js, layout, codec, 2000, 3);
    CHECK(r.zone_js == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.heatmap_js == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.steps_generated.steps == 40);
}

TEST_CASE("compare_report: disjoint single-zone purchase sets give zone JS 1") {
    const SpatialCodec codec;
    const StoreLayout layout = make_layout('A', 1);
    // find cells inside two different zones
    const auto cell_in_zone = [&](int zi) {
        const Point2D c = layout.zones[zi].rect.center();
        return codec.point_cell(c);
    };
    std::vector<CellJourney> gen{{{cell_in_zone(10)}, {{0, 2}}}};
    std::vector<CellJourney> ref{{{cell_in_zone(30)}, {{0, 2}}}};
    const EvalReport r = compare_report(gen, ref, layout, codec, 2000, 3);
    CHECK(r.zone_js == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compare_report rejects empty sets") {
    const SpatialCodec codec;
    const StoreLayout layout = make_layout('A', 1);
    CHECK_THROWS(static_cast<void>(compare_report({}, {{{{1, 1}}, {}}}, layout, codec)));
}

TEST_CASE("corpus lines decode for evaluation, bad lines are rejected") {
    const std::vector<CellJourney> js = decode_corpus_lines({"aeimqu aeimqv2 ."});
    REQUIRE(js.size() == 1);
    CHECK(js[0].cells.size() == 2);
    CHECK(js[0].events.size() == 1);
    CHECK_THROWS(static_cast<void>(decode_corpus_lines({"zzz ."})));
}

TEST_CASE("pgm and text exports are well-formed") {
    Heatmap h;
    h.at(0, 0) = 4;
    h.at(63, 63) = 2;
    const std::string pgm = heatmap_to_pgm(h);
    CHECK(pgm.substr(0, 3) == "P2\n");
    CHECK(pgm.find("64 64") != std::string::npos);
    const std::string txt = heatmap_to_text(h);
    CHECK(txt.find('4') != std::string::npos);
}
