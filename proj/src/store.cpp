#include "journeygen/store.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "journeygen/errors.hpp"
#include "journeygen/io_util.hpp"

namespace jgen {

using nlohmann::json;

namespace {

json rect_to_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4)
        throw DataFormatError("layout: " + what + " must be [x0, y0, x1, y1]");
    Rect r{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1))
        throw DataFormatError("layout: " + what + " has empty extent");
    return r;
}

}  // namespace

void validate_layout(const StoreLayout& layout) {
    if (layout.store_side <= 0.0) throw DataFormatError("layout: store_side must be positive");
    if (layout.zones.empty()) throw DataFormatError("layout: zone count must be > 0");
    std::set<int> ids;
    for (const Zone& z : layout.zones) {
        if (!ids.insert(z.id).second)
            throw DataFormatError("layout: duplicate zone id " + std::to_string(z.id));
        if (z.rect.x0 < 0 || z.rect.y0 < 0 || z.rect.x1 > layout.store_side ||
            z.rect.y1 > layout.store_side)
            throw DataFormatError("layout: zone " + std::to_string(z.id) +
                                  " extends outside store bounds");
    }
}

std::string layout_to_json(const StoreLayout& layout) {
    json j;
    j["store_side"] = layout.store_side;
    j["zones"] = json::array();
    for (const Zone& z : layout.zones) {
        json zj;
        zj["id"] = z.id;
        zj["rect"] = rect_to_json(z.rect);
        zj["categories"] = z.categories;
        j["zones"].push_back(zj);
    }
    j["entrance"] = rect_to_json(layout.entrance);
    j["checkout"] = rect_to_json(layout.checkout);
    if (!layout.shelves.empty()) {
        j["shelves"] = json::array();
        for (const Rect& s : layout.shelves) j["shelves"].push_back(rect_to_json(s));
    }
    return j.dump(2) + "\n";
}

StoreLayout layout_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataFormatError(std::string("layout: invalid JSON: ") + e.what());
    }
    StoreLayout layout;
    try {
        layout.store_side = j.at("store_side").get<double>();
        for (const json& zj : j.at("zones")) {
            Zone z;
            z.id = zj.at("id").get<int>();
            z.rect = rect_from_json(zj.at("rect"), "zone rect");
            for (const json& c : zj.at("categories")) z.categories.insert(c.get<std::string>());
            layout.zones.push_back(std::move(z));
        }
        layout.entrance = rect_from_json(j.at("entrance"), "entrance");
        layout.checkout = rect_from_json(j.at("checkout"), "checkout");
        if (j.contains("shelves"))
            for (const json& sj : j["shelves"])
                layout.shelves.push_back(rect_from_json(sj, "shelf"));
    } catch (const json::exception& e) {
        throw DataFormatError(std::string("layout: missing or bad field: ") + e.what());
    }
    validate_layout(layout);
    return layout;
}

void save_layout(const StoreLayout& layout, const std::string& path) {
    atomic_write_file(path, layout_to_json(layout));
}

StoreLayout load_layout(const std::string& path) { return layout_from_json(read_file(path)); }

std::uint64_t layout_hash(const StoreLayout& layout) { return fnv1a64(layout_to_json(layout)); }

namespace {

// Fixed-precision float formatting so files are byte-stable across runs.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& what, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataFormatError("line " + std::to_string(lineno) + ": bad " + what + " \"" + s +
                              "\"");
    }
}

}  // namespace

void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path) {
    std::ostringstream out;
    for (const Trajectory& tr : trajs) {
        const double t_last = tr.points.empty() ? 0.0 : tr.points.back().t;
        const double t0_abs = tr.checkout_time - t_last;
        for (const TimedPoint& p : tr.points)
            out << tr.customer_id << ',' << fmt(t0_abs + p.t) << ',' << fmt(p.x) << ',' << fmt(p.y)
                << '\n';
    }
    atomic_write_file(path, out.str());
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::vector<Trajectory> trajs;
    std::size_t lineno = 0;
    double t0_abs = 0.0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4)
            throw DataFormatError("line " + std::to_string(lineno) +
                                  ": expected customer_id,t,x,y");
        const double t_abs = parse_double(f[1], "t", lineno);
        const double x = parse_double(f[2], "x", lineno);
        const double y = parse_double(f[3], "y", lineno);
        if (trajs.empty() || trajs.back().customer_id != f[0]) {
            trajs.push_back(Trajectory{f[0], {}, 0.0});
            t0_abs = t_abs;
        }
        Trajectory& tr = trajs.back();
        const double t_rel = t_abs - t0_abs;
        if (!tr.points.empty() && t_rel <= tr.points.back().t)
            throw DataFormatError("line " + std::to_string(lineno) + ": timestamps of journey " +
                                  f[0] + " not strictly increasing");
        tr.points.push_back({t_rel, x, y});
        tr.checkout_time = t_abs;
    }
    return trajs;
}

void save_scanner_items(const std::vector<ScannerItem>& items, const std::string& path) {
    std::ostringstream out;
    for (const ScannerItem& it : items)
        out << fmt(it.txn_time) << ',' << it.category << ',' << it.quantity << '\n';
    atomic_write_file(path, out.str());
}

std::vector<ScannerItem> load_scanner_items(const std::string& path) {
    std::vector<ScannerItem> items;
    std::size_t lineno = 0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3)
            throw DataFormatError("line " + std::to_string(lineno) +
                                  ": expected txn_time,category,quantity");
        ScannerItem it;
        it.txn_time = parse_double(f[0], "txn_time", lineno);
        it.category = f[1];
        it.quantity = static_cast<int>(parse_double(f[2], "quantity", lineno));
        if (it.quantity < 1)
            throw DataFormatError("line " + std::to_string(lineno) + ": quantity must be >= 1");
        items.push_back(std::move(it));
    }
    return items;
}

}  // namespace jgen
