#pragma once

#include <vector>

#include "perfhom/core.hpp"

namespace testing {

using perfhom::Box;
using perfhom::Point;
using perfhom::PointCloud;
using perfhom::Rng;

inline Box box2(double x0, double y0, double x1, double y1) { return {{x0, y0, 0.0}, {x1, y1, 0.0}}; }

inline PointCloud cloud2(const std::vector<std::pair<double, double>>& pts, Box window) {
    std::vector<Point> p;
    for (auto [x, y] : pts) p.push_back({x, y, 0.0});
    return PointCloud(2, window, p);
}

inline PointCloud cloud2(const std::vector<std::pair<double, double>>& pts) {
    return cloud2(pts, box2(-10, -10, 10, 10));
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// m uniform points in the window (m fixed, not Poisson).
inline PointCloud uniform_cloud(Rng& rng, std::size_t m, const Box& w, int dim = 2) {
    std::vector<Point> p;
    for (std::size_t i = 0; i < m; ++i) {
        Point q{0.0, 0.0, 0.0};
        for (int k = 0; k < dim; ++k) q[k] = uniform(rng, w.lo[k], w.hi[k]);
        p.push_back(q);
    }
    return PointCloud(dim, w, p);
}

}  // namespace testing
