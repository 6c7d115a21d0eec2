#include "journeygen/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "journeygen/errors.hpp"

namespace jgen {

namespace {

double sqdist(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);  // keep the smaller index as root
        parent[b] = a;
    }
};

// Bucket grid with cell side eps; eps-neighbors live in the 3x3x3 block.
struct BucketIndex {
    double eps;
    std::map<std::array<std::int64_t, 3>, std::vector<int>> cells;

    BucketIndex(const std::vector<Vec3>& pts, double eps_) : eps(eps_) {
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) cells[key(pts[i])].push_back(i);
    }

    std::array<std::int64_t, 3> key(const Vec3& p) const {
        return {static_cast<std::int64_t>(std::floor(p[0] / eps)),
                static_cast<std::int64_t>(std::floor(p[1] / eps)),
                static_cast<std::int64_t>(std::floor(p[2] / eps))};
    }

    // indices of points within closed eps-ball of pts[i], ascending
    std::vector<int> neighbors(const std::vector<Vec3>& pts, int i) const {
        std::vector<int> out;
        const auto k = key(pts[i]);
        const double e2 = eps * eps;
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = cells.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it == cells.end()) continue;
                    for (int j : it->second)
                        if (sqdist(pts[i], pts[j]) <= e2) out.push_back(j);
                }
        std::sort(out.begin(), out.end());
        return out;
    }
};

}  // namespace

std::vector<int> dbscan(const std::vector<Vec3>& points, double eps, int min_pts) {
    if (!(eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
    if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
    const int n = static_cast<int>(points.size());
    std::vector<int> labels(n, -1);
    if (n == 0) return labels;

    const BucketIndex index(points, eps);
    std::vector<std::vector<int>> nbrs(n);
    std::vector<bool> core(n, false);
    for (int i = 0; i < n; ++i) {
        nbrs[i] = index.neighbors(points, i);
        core[i] = static_cast<int>(nbrs[i].size()) >= min_pts;
    }

    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (int j : nbrs[i])
            if (core[j]) uf.unite(i, j);
    }

    // cluster ids in order of the lowest core index per component
    std::vector<int> root_label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        const int r = uf.find(i);
        if (root_label[r] < 0) root_label[r] = next++;
        labels[i] = root_label[r];
    }

    // border points: lowest-index core neighbor decides the cluster
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (int j : nbrs[i]) {
            if (core[j]) {
                labels[i] = labels[j];
                break;
            }
        }
    }
    return labels;
}

}  // namespace jgen
