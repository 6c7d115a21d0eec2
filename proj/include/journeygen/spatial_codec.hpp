#pragma once

#include <string>

#include "journeygen/geometry.hpp"

namespace jgen {

// One cell of the 64x64 grid. i is the column (x), j the row (y).
struct GridCell {
    int i = 0;
    int j = 0;
    bool operator==(const GridCell&) const = default;
};

struct CodeParseStatus {
    bool ok = false;
    GridCell cell;
    int error_pos = -1;  // character position of the first violation
    std::string error;
};

// Maps store coordinates to six-character hierarchical cell codes and back.
// The space is split into quadrants six times; level k uses the alphabet
// 'a'+4(k-1) .. 'a'+4(k-1)+3 and the quadrant-to-letter assignment is
// offset = 2*y_bit + x_bit (0 = lower-left, 1 = lower-right, 2 = upper-left,
// 3 = upper-right). Cells are half-open, so a point on an internal boundary
// belongs to the higher-indexed half.
class SpatialCodec {
   public:
    static constexpr int kLevels = 6;
    static constexpr int kGrid = 64;  // 2^kLevels

    explicit SpatialCodec(double side = 32.0);

    double side() const { return side_; }
    double cell_size() const { return side_ / kGrid; }

    // Throws std::domain_error naming the offending axis when p is outside
    // [0, side) on either coordinate.
    std::string encode_location(Point2D p) const;

    GridCell point_cell(Point2D p) const;

    // Throws DataFormatError on malformed codes (wrong length or a character
    // outside its level alphabet); the message carries the position.
    GridCell decode_code(const std::string& code) const;

    // Non-throwing variant used by the journey-text parser.
    static CodeParseStatus try_decode(const std::string& code);

    std::string encode_cell(GridCell g) const;

    Point2D cell_center(GridCell g) const;

   private:
    double side_;
};

}  // namespace jgen
