#pragma once

#include <algorithm>
#include <cmath>

namespace jgen {

struct Point2D {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Axis-aligned rectangle, half-open on the max edges for containment tests.
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    bool contains(Point2D p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }

    bool intersects(const Rect& o) const {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Point2D center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

}  // namespace jgen
