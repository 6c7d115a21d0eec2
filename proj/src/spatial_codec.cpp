#include "journeygen/spatial_codec.hpp"

#include <cmath>
#include <stdexcept>

#include "journeygen/errors.hpp"

namespace jgen {

SpatialCodec::SpatialCodec(double side) : side_(side) {
    if (!(side > 0.0)) throw ConfigError("codec side must be positive");
}

GridCell SpatialCodec::point_cell(Point2D p) const {
    if (!std::isfinite(p.x) || p.x < 0.0 || p.x >= side_)
        throw std::domain_error("x coordinate " + std::to_string(p.x) + " outside [0, " +
                                std::to_string(side_) + ")");
    if (!std::isfinite(p.y) || p.y < 0.0 || p.y >= side_)
        throw std::domain_error("y coordinate " + std::to_string(p.y) + " outside [0, " +
                                std::to_string(side_) + ")");
    const double cell = cell_size();
    int i = static_cast<int>(p.x / cell);
    int j = static_cast<int>(p.y / cell);
    // p.x / cell can round up to kGrid when p.x is just below side_
    i = std::min(i, kGrid - 1);
    j = std::min(j, kGrid - 1);
    return {i, j};
}

std::string SpatialCodec::encode_cell(GridCell g) const {
    std::string code(kLevels, '?');
    for (int k = 1; k <= kLevels; ++k) {
        const int shift = kLevels - k;
        const int xb = (g.i >> shift) & 1;
        const int yb = (g.j >> shift) & 1;
        code[k - 1] = static_cast<char>('a' + 4 * (k - 1) + 2 * yb + xb);
    }
    return code;
}

std::string SpatialCodec::encode_location(Point2D p) const { return encode_cell(point_cell(p)); }

CodeParseStatus SpatialCodec::try_decode(const std::string& code) {
    CodeParseStatus st;
    if (code.size() != kLevels) {
        st.error_pos = static_cast<int>(std::min(code.size(), static_cast<std::size_t>(kLevels)));
        st.error = "code must be exactly 6 characters, got " + std::to_string(code.size());
        return st;
    }
    GridCell g;
    for (int k = 1; k <= kLevels; ++k) {
        const char c = code[k - 1];
        const char lo = static_cast<char>('a' + 4 * (k - 1));
        if (c < lo || c > lo + 3) {
            st.error_pos = k - 1;
            st.error = std::string("character '") + c + "' at position " + std::to_string(k - 1) +
                       " not in level-" + std::to_string(k) + " alphabet " + lo + "-" +
                       static_cast<char>(lo + 3);
            return st;
        }
        const int q = c - lo;
        const int shift = kLevels - k;
        g.i |= (q & 1) << shift;
        g.j |= (q >> 1) << shift;
    }
    st.ok = true;
    st.cell = g;
    return st;
}

GridCell SpatialCodec::decode_code(const std::string& code) const {
    const CodeParseStatus st = try_decode(code);
    if (!st.ok) throw DataFormatError("invalid cell code \"" + code + "\": " + st.error);
    return st.cell;
}

Point2D SpatialCodec::cell_center(GridCell g) const {
    const double cell = cell_size();
    return {(g.i + 0.5) * cell, (g.j + 0.5) * cell};
}

}  // namespace jgen
