#pragma once

#include <array>
#include <vector>

namespace jgen {

using Vec3 = std::array<double, 3>;

// Density clustering over 3-vectors (here: xyt-embedded trajectories).
// A point is core iff its closed eps-ball, itself included, holds at least
// min_pts points. Clusters are the density-connected components of the core
// points, numbered by their lowest member index; a non-core point with a core
// neighbor joins the cluster of its lowest-index core neighbor. Noise is -1.
std::vector<int> dbscan(const std::vector<Vec3>& points, double eps = 2.5, int min_pts = 4);

}  // namespace jgen
