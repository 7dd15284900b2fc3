#include <doctest.h>

#include <deque>

#include "delta_oracle.hpp"
#include "perfhom/geometry.hpp"
#include "support.hpp"

using namespace perfhom;
using namespace testing;

namespace {

// O(m^2) breadth-first transitive closure.
std::vector<std::size_t> bfs_labels(const PointCloud& cloud, double r) {
    const std::size_t m = cloud.size();
    std::vector<std::size_t> label(m, m);
    std::size_t next = 0;
    for (std::size_t s = 0; s < m; ++s) {
        if (label[s] != m) continue;
        std::deque<std::size_t> q{s};
        label[s] = next;
        while (!q.empty()) {
            const std::size_t i = q.front();
            q.pop_front();
            for (std::size_t j = 0; j < m; ++j)
                if (label[j] == m && dist(cloud[i], cloud[j], 2) < 2.0 * r) {
                    label[j] = next;
                    q.push_back(j);
                }
        }
        ++next;
    }
    return label;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("clusters: overlap and separation") {
    const GeometryParams g{1.0};
    CHECK(geometry::clusters(cloud2({{0, 0}, {1, 0}}), g).size() == 1);
    CHECK(geometry::clusters(cloud2({{0, 0}, {3, 0}}), g).size() == 2);
    // exactly 2r apart: the strict criterion keeps them apart
    CHECK(geometry::clusters(cloud2({{0, 0}, {2, 0}}), g).size() == 2);
    CHECK(geometry::clusters(PointCloud(2, box2(0, 0, 1, 1), {}), g).size() == 0);
}

TEST_CASE("clusters agree with breadth-first closure") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto cloud = uniform_cloud(rng, 50, box2(0, 0, 8, 8));
        const GeometryParams g{0.3 + 0.05 * (t % 5)};
        const auto cs = geometry::clusters(cloud, g);
        const auto lab = bfs_labels(cloud, g.r);
        // BFS labels are also ordered by smallest member, so ids coincide
        for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(cs.cluster_of[i] == lab[i]);
        std::size_t total = 0;
        for (std::size_t c = 0; c < cs.size(); ++c) {
            total += cs.clusters[c].size();
            CHECK(std::is_sorted(cs.clusters[c].begin(), cs.clusters[c].end()));
            for (auto i : cs.clusters[c]) CHECK(cs.cluster_of[i] == c);
        }
        CHECK(total == cloud.size());
    }
}

TEST_CASE("covered is the closed union") {
    const GeometryParams g{1.0};
    CHECK(geometry::covered({0, 0, 0}, cloud2({{0, 0.5}}), g));
    CHECK_FALSE(geometry::covered({0, 0, 0}, PointCloud(2, box2(-1, -1, 1, 1), {}), g));
    CHECK(geometry::covered({0, 0, 0}, cloud2({{0, 1.0}}), g));
    CHECK_FALSE(geometry::covered({0, 0, 0}, cloud2({{0, 1.0 + 1e-12}}), g));
}

TEST_CASE("covered is translation equivariant") {
    Rng rng(3);
    const GeometryParams g{0.4};
    const Point t{4.0, -2.5, 0.0};
    for (int k = 0; k < 10; ++k) {
        const auto cloud = uniform_cloud(rng, 40, box2(0, 0, 6, 6));
        const auto moved = cloud.translated(t);
        for (int q = 0; q < 200; ++q) {
            const Point p{uniform(rng, -1, 7), uniform(rng, -1, 7), 0.0};
            const Point pt{p[0] + t[0], p[1] + t[1], 0.0};
            CHECK(geometry::covered(p, cloud, g) == geometry::covered(pt, moved, g));
        }
    }
}

TEST_CASE("CoverageIndex matches covered") {
    Rng rng(8);
    const GeometryParams g{0.3};
    const auto cloud = uniform_cloud(rng, 100, box2(0, 0, 5, 5));
    const geometry::CoverageIndex idx(cloud, g);
    for (int q = 0; q < 1000; ++q) {
        const Point p{uniform(rng, 0, 5), uniform(rng, 0, 5), 0.0};
        CHECK(idx.covered(p) == geometry::covered(p, cloud, g));
    }
}

TEST_CASE("fill: triangle encloses a pocket") {
    const GeometryParams g{1.0};
    const double s = 1.9, h = s * std::sqrt(3.0) / 2.0;
    const auto cloud = cloud2({{0, 0}, {s, 0}, {s / 2, h}});
    const auto raster = geometry::fill(cloud, g, 0.01);
    const Point centroid{s / 2, h / 3, 0.0};
    CHECK(raster.state_at(centroid) == geometry::CellState::VacantIsland);
    CHECK(raster.in_filled(centroid));
    CHECK_FALSE(raster.in_boolean(centroid));
    CHECK(raster.count(geometry::CellState::VacantIsland) > 0);
    CHECK(raster.verify_unbounded_reachability());
}

TEST_CASE("fill: no islands for a single disk or disjoint disks") {
    const GeometryParams g{1.0};
    for (const auto& cloud : {cloud2({{0, 0}}), cloud2({{0, 0}, {3, 0}}), cloud2({{0, 0}, {1.5, 0}})}) {
        const auto raster = geometry::fill(cloud, g, 0.05);
        CHECK(raster.count(geometry::CellState::VacantIsland) == 0);
        for (std::size_t c = 0; c < raster.cells().size(); ++c) {
            const bool boolean = geometry::covered(raster.frame().center(c), cloud, g);
            CHECK(boolean == (raster.state(c) == geometry::CellState::Covered));
        }
    }
}

TEST_CASE("fill: unbounded cells reach the frame on random clouds") {
    Rng rng(21);
    for (int t = 0; t < 10; ++t) {
        const auto cloud = uniform_cloud(rng, 120, box2(0, 0, 6, 6));
        const auto raster = geometry::fill(cloud, {0.35}, 0.35 / 8);
        CHECK(raster.verify_unbounded_reachability());
    }
}

TEST_CASE("fill rejects non-positive resolution") {
    CHECK_THROWS_AS(geometry::fill(cloud2({{0, 0}}), {1.0}, 0.0), ParameterError);
    CHECK_THROWS_AS(geometry::fill(cloud2({{0, 0}}), {1.0}, -1.0), ParameterError);
}

TEST_CASE("fill with anchor puts cell corners on the anchor lattice") {
    const auto raster = geometry::fill(cloud2({{0.3, 0.2}}), {0.5}, 0.1, Point{0.05, 0.05, 0.0});
    const auto& f = raster.frame();
    CHECK(std::abs(std::remainder(f.origin[0] - 0.05, 0.1)) < 1e-9);
    CHECK(std::abs(std::remainder(f.origin[1] - 0.05, 0.1)) < 1e-9);
}

TEST_CASE("delta_hat closed forms") {
    CHECK(geometry::delta_hat({{0, 0, 0}}, 2, {1.0}).value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(geometry::delta_hat({{0, 0, 0}, {2, 0, 0}}, 2, {1.0}).value == 0.0);
    CHECK_THROWS_AS(geometry::delta_hat({{0, 0, 0}}, 3, {1.0}), UnsupportedDimension);
    CHECK_THROWS_AS(geometry::delta_hat({}, 2, {1.0}), ParameterError);
    CHECK(geometry::delta_hat({{0, 0, 0}}, 2, {1.0}).conservative);
}

TEST_CASE("delta oracle reproduces the single-disk radius") {
    DeltaOracle o;
    o.c = {{0, 0, 0}};
    CHECK(o.delta() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));
}

TEST_CASE("delta_hat is positive and below the oracle on random clusters") {
    Rng rng(404);
    for (int t = 0; t < 25; ++t) {
        std::vector<Point> c{{0, 0, 0}};
        const std::size_t m = 2 + t % 2;
        while (c.size() < m) {
            const Point b = c[rng() % c.size()];
            const double d = uniform(rng, 0.1, 1.95), a = uniform(rng, 0, 2 * M_PI);
            c.push_back({b[0] + d * std::cos(a), b[1] + d * std::sin(a), 0.0});
        }
        DeltaOracle o;
        o.c = c;
        const double hat = geometry::delta_hat(c, 2, {1.0}).value;
        CHECK(hat > 0.0);
        CHECK(hat <= o.delta());
    }
}

TEST_CASE("certificate closed forms") {
    const auto c = geometry::certificate(5, {0.3});
    CHECK(c.delta == doctest::Approx(0.2));
    CHECK(c.lipschitz_bound == doctest::Approx(std::sqrt(3.0)));
    CHECK(c.diameter_bound == doctest::Approx(3.0));
}

TEST_CASE("disk union boundary of two overlapping disks") {
    const std::vector<Point> c{{0, 0, 0}, {1, 0, 0}};
    const auto b = geometry::disk_union_boundary(c, 1.0);
    CHECK(b.corners.size() == 2);
    double len = 0.0;
    for (const auto& a : b.arcs) len += a.length;
    // each circle loses the arc of half-angle acos(1/2)
    CHECK(len == doctest::Approx(2.0 * (2.0 * M_PI - 2.0 * std::acos(0.5))));
}

}  // TEST_SUITE
