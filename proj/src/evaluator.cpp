#include "journeygen/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "journeygen/errors.hpp"
#include "journeygen/rng.hpp"

namespace jgen {

CellJourney to_cell_journey(const JourneyParseResult& parsed) {
    if (!parsed.ok) throw DataFormatError("cannot evaluate an invalid journey: " + parsed.error);
    return {parsed.cells, parsed.events};
}

std::vector<CellJourney> decode_corpus_lines(const std::vector<std::string>& lines) {
    std::vector<CellJourney> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        JourneyParseResult r = parse_journey_text(lines[i]);
        if (!r.ok)
            throw DataFormatError("corpus line " + std::to_string(i + 1) + ": " + r.error);
        out.push_back({std::move(r.cells), std::move(r.events)});
    }
    return out;
}

long Heatmap::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0L);
}

std::vector<double> Heatmap::distribution() const {
    const double t = static_cast<double>(std::max(1L, total()));
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / t;
    return out;
}

HeatmapResult traffic_heatmap(const std::vector<CellJourney>& journeys, int n_sample,
                              std::uint64_t seed) {
    HeatmapResult res;
    std::vector<std::size_t> idx(journeys.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (n_sample < static_cast<int>(journeys.size())) {
        Rng rng(seed);
        rng.shuffle(idx);
        idx.resize(n_sample);
    } else if (n_sample > static_cast<int>(journeys.size())) {
        res.population_smaller_than_requested = true;
    }
    res.sampled = static_cast<int>(idx.size());
    for (std::size_t k : idx)
        for (const GridCell& c : journeys[k].cells) ++res.map.at(c.i, c.j);
    return res;
}

std::string heatmap_to_text(const Heatmap& h) {
    std::ostringstream out;
    for (int j = Heatmap::kGrid - 1; j >= 0; --j) {
        for (int i = 0; i < Heatmap::kGrid; ++i) {
            if (i) out << ' ';
            out << h.at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

std::string heatmap_to_pgm(const Heatmap& h) {
    long mx = 1;
    for (long c : h.counts) mx = std::max(mx, c);
    std::ostringstream out;
    out << "P2\n" << Heatmap::kGrid << " " << Heatmap::kGrid << "\n255\n";
    for (int j = Heatmap::kGrid - 1; j >= 0; --j) {
        for (int i = 0; i < Heatmap::kGrid; ++i) {
            if (i) out << ' ';
            out << (255L * h.at(i, j)) / mx;
        }
        out << '\n';
    }
    return out.str();
}

ZoneDistribution zone_purchase_distribution(const std::vector<CellJourney>& journeys,
                                            const StoreLayout& layout,
                                            const SpatialCodec& codec) {
    ZoneDistribution d;
    const std::size_t nz = layout.zones.size();
    d.counts.assign(nz + 1, 0);
    d.journeys = static_cast<long>(journeys.size());
    for (const CellJourney& j : journeys) {
        for (const PurchaseEvent& e : j.events) {
            if (e.point_index < 0 || e.point_index >= static_cast<int>(j.cells.size())) continue;
            const Point2D p = codec.cell_center(j.cells[e.point_index]);
            const int z = layout.zone_at(p);
            d.counts[z >= 0 ? z : nz] += e.count;
        }
    }
    const long total = std::accumulate(d.counts.begin(), d.counts.end(), 0L);
    d.all_zero = total == 0;
    d.probs.assign(nz + 1, 0.0);
    if (!d.all_zero)
        for (std::size_t i = 0; i <= nz; ++i)
            d.probs[i] = static_cast<double>(d.counts[i]) / total;
    d.per_visit.assign(nz + 1, 0.0);
    if (d.journeys > 0)
        for (std::size_t i = 0; i <= nz; ++i)
            d.per_visit[i] = static_cast<double>(d.counts[i]) / d.journeys;
    return d;
}

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw ConfigError("js_divergence: support sizes differ (" + std::to_string(p.size()) +
                          " vs " + std::to_string(q.size()) + ")");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] < 0.0 || q[i] < 0.0) throw ConfigError("js_divergence: negative entry");
    double js = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
    }
    return std::max(0.0, js);
}

StepStats step_displacement_stats(const std::vector<CellJourney>& journeys,
                                  const SpatialCodec& codec, double threshold) {
    StepStats s;
    s.threshold = threshold;
    for (const CellJourney& j : journeys) {
        for (std::size_t k = 1; k < j.cells.size(); ++k) {
            const Point2D a = codec.cell_center(j.cells[k - 1]);
            const Point2D b = codec.cell_center(j.cells[k]);
            ++s.steps;
            if (distance(a, b) <= threshold) ++s.within_walkable;
        }
    }
    return s;
}

EvalReport compare_report(const std::vector<CellJourney>& generated,
                          const std::vector<CellJourney>& reference, const StoreLayout& layout,
                          const SpatialCodec& codec, int heatmap_samples, std::uint64_t seed) {
    if (generated.empty() || reference.empty())
        throw ConfigError("compare_report: both journey sets must be non-empty");
    EvalReport r;
    r.n_generated = static_cast<long>(generated.size());
    r.n_reference = static_cast<long>(reference.size());
    r.heat_generated = traffic_heatmap(generated, heatmap_samples, derive_seed(seed, 1)).map;
    r.heat_reference = traffic_heatmap(reference, heatmap_samples, derive_seed(seed, 2)).map;
    r.zones_generated = zone_purchase_distribution(generated, layout, codec);
    r.zones_reference = zone_purchase_distribution(reference, layout, codec);
    r.zone_js = js_divergence(r.zones_generated.probs, r.zones_reference.probs);
    r.heatmap_js =
        js_divergence(r.heat_generated.distribution(), r.heat_reference.distribution());
    r.steps_generated = step_displacement_stats(generated, codec);
    return r;
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["n_generated"] = r.n_generated;
    j["n_reference"] = r.n_reference;
    j["zone_js"] = r.zone_js;
    j["heatmap_js"] = r.heatmap_js;
    j["validity_rate"] = r.validity_rate;
    j["step_fraction_within_2_5m"] = r.steps_generated.fraction_within();
    j["steps"] = r.steps_generated.steps;
    j["zones_generated_all_zero"] = r.zones_generated.all_zero;
    j["zones_reference_all_zero"] = r.zones_reference.all_zero;
    return j.dump(2) + "\n";
}

std::string zone_table_csv(const EvalReport& r, const StoreLayout& layout) {
    std::ostringstream out;
    out << "zone_id,generated_count,generated_prob,generated_per_visit,"
           "reference_count,reference_prob,reference_per_visit\n";
    const std::size_t nz = layout.zones.size();
    for (std::size_t i = 0; i <= nz; ++i) {
        if (i < nz)
            out << layout.zones[i].id;
        else
            out << "unzoned";
        out << ',' << r.zones_generated.counts[i] << ',' << r.zones_generated.probs[i] << ','
            << r.zones_generated.per_visit[i] << ',' << r.zones_reference.counts[i] << ','
            << r.zones_reference.probs[i] << ',' << r.zones_reference.per_visit[i] << '\n';
    }
    return out.str();
}

}  // namespace jgen
