#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <journeygen/dbscan.hpp>
#include <journeygen/rng.hpp>
#include <map>
#include <vector>

using namespace jgen;

namespace {

// Naive O(n^2) reference: full adjacency, core flags, BFS components over
// cores, border points to their lowest-index core neighbor.
std::vector<int> dbscan_reference(const std::vector<Vec3>& pts, double eps, int min_pts) {
    const int n = static_cast<int>(pts.size());
    const auto close = [&](int a, int b) {
        const double dx = pts[a][0] - pts[b][0];
        const double dy = pts[a][1] - pts[b][1];
        const double dz = pts[a][2] - pts[b][2];
        return dx * dx + dy * dy + dz * dz <= eps * eps;
    };
    std::vector<std::vector<int>> adj(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (close(a, b)) adj[a].push_back(b);
    std::vector<bool> core(n);
    for (int a = 0; a < n; ++a) core[a] = static_cast<int>(adj[a].size()) >= min_pts;

    std::vector<int> labels(n, -1);
    int next = 0;
    for (int a = 0; a < n; ++a) {
        if (!core[a] || labels[a] >= 0) continue;
        const int cluster = next++;
        std::vector<int> stack{a};
        labels[a] = cluster;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            for (int b : adj[c]) {
                if (core[b] && labels[b] < 0) {
                    labels[b] = cluster;
                    stack.push_back(b);
                }
            }
        }
    }
    for (int a = 0; a < n; ++a) {
        if (core[a]) continue;
        for (int b : adj[a]) {
            if (core[b]) {
                labels[a] = labels[b];
                break;
            }
        }
    }
    return labels;
}

// equality of partitions up to label permutation (noise must match exactly)
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, bwd;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if ((a[k] < 0) != (b[k] < 0)) return false;
        if (a[k] < 0) continue;
        if (fwd.count(a[k]) && fwd[a[k]] != b[k]) return false;
        if (bwd.count(b[k]) && bwd[b[k]] != a[k]) return false;
        fwd[a[k]] = b[k];
        bwd[b[k]] = a[k];
    }
    return true;
}

}  // namespace

TEST_CASE("single point is noise") {
    CHECK(dbscan({{1.0, 2.0, 0.0}}) == std::vector<int>{-1});
}

TEST_CASE("empty input gives empty labels") {
    CHECK(dbscan({}).empty());
}

TEST_CASE("one dense blob forms cluster 0") {
    std::vector<Vec3> pts;
    for (int k = 0; k < 6; ++k) pts.push_back({1.0 + 0.01 * k, 2.0, 0.0});
    const std::vector<int> labels = dbscan(pts);
    for (int l : labels) CHECK(l == 0);
}

TEST_CASE("two separated blobs and a far straggler") {
    std::vector<Vec3> pts;
    for (int k = 0; k < 5; ++k) pts.push_back({0.0, 0.1 * k, 0.0});
    for (int k = 0; k < 5; ++k) pts.push_back({20.0, 0.1 * k, 0.0});
    pts.push_back({100.0, 100.0, 100.0});
    const std::vector<int> labels = dbscan(pts);
    CHECK(labels[0] == 0);
    CHECK(labels[5] == 1);
    CHECK(labels[10] == -1);
}

TEST_CASE("matches the brute-force oracle on 100 random instances") {
    Rng rng(2024);
    for (int inst = 0; inst < 100; ++inst) {
        const int n = 1 + static_cast<int>(rng.uniform_index(200));
        std::vector<Vec3> pts;
        pts.reserve(n);
        // mixture of dense pockets and scattered noise, xyt-like scales
        for (int k = 0; k < n; ++k) {
            if (rng.uniform() < 0.7) {
                const double cx = rng.uniform(0.0, 30.0);
                const double cy = rng.uniform(0.0, 30.0);
                const double cz = rng.uniform(0.0, 40.0);
                pts.push_back({cx + rng.normal(0.0, 0.8), cy + rng.normal(0.0, 0.8),
                               cz + rng.normal(0.0, 0.8)});
            } else {
                pts.push_back({rng.uniform(0.0, 32.0), rng.uniform(0.0, 32.0),
                               rng.uniform(0.0, 40.0)});
            }
        }
        const std::vector<int> got = dbscan(pts, 2.5, 4);
        const std::vector<int> want = dbscan_reference(pts, 2.5, 4);
        REQUIRE(same_partition(got, want));
    }
}

TEST_CASE("labels invariant under global translation") {
    Rng rng(99);
    for (int inst = 0; inst < 20; ++inst) {
        const int n = 5 + static_cast<int>(rng.uniform_index(80));
        std::vector<Vec3> pts;
        for (int k = 0; k < n; ++k)
            pts.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        std::vector<Vec3> shifted = pts;
        const double tx = rng.uniform(-50.0, 50.0), ty = rng.uniform(-50.0, 50.0),
                     tz = rng.uniform(-50.0, 50.0);
        for (Vec3& p : shifted) {
            p[0] += tx;
            p[1] += ty;
            p[2] += tz;
        }
        CHECK(same_partition(dbscan(pts, 2.5, 4), dbscan(shifted, 2.5, 4)));
    }
}

TEST_CASE("a 20 s pause at 5 s sampling forms one cluster") {
    // 4 samples within tracking noise of one spot, time scaled by 0.1
    std::vector<Vec3> pts;
    for (int k = 0; k < 4; ++k) pts.push_back({5.0 + 0.05 * k, 5.0, 0.1 * (5.0 * k)});
    const std::vector<int> labels = dbscan(pts, 2.5, 4);
    for (int l : labels) CHECK(l == 0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(static_cast<void>(dbscan({{0, 0, 0}}, 0.0, 4)));
    CHECK_THROWS(static_cast<void>(dbscan({{0, 0, 0}}, 2.5, 0)));
}
