#include <doctest.h>

#include "perfhom/geometry.hpp"
#include "perfhom/process.hpp"
#include "perfhom/thinning.hpp"
#include "support.hpp"

using namespace perfhom;
using namespace testing;

namespace {

bool is_subset(const PointCloud& small, const PointCloud& big) {
    for (const auto& p : small.points())
        if (std::find(big.points().begin(), big.points().end(), p) == big.points().end()) return false;
    return true;
}

}  // namespace

TEST_SUITE("thinning") {

TEST_CASE("f1 distance bands") {
    const GeometryParams g{1.0};
    const thinning::ThinningLevel n{10};
    CHECK(thinning::f1(cloud2({{0, 0}, {0.05, 0}}), g, n).empty());
    CHECK(thinning::f1(cloud2({{0, 0}, {2.05, 0}}), g, n).empty());
    CHECK(thinning::f1(cloud2({{0, 0}, {0.5, 0}, {5, 0}}), g, n).size() == 3);
    // band edges are open
    CHECK(thinning::f1(cloud2({{0, 0}, {0.1, 0}}), g, n).size() == 2);
}

TEST_CASE("f2 examples") {
    const GeometryParams g{1.0};
    CHECK(thinning::f2(cloud2({{0, 0}}), g, {1}).empty());
    CHECK(thinning::f2(cloud2({{0, 0}}), g, {2}).size() == 1);
    // chain of n + 1 overlapping disks; gap 1.2 keeps every pair out of the f1 bands
    const int n = 4;
    std::vector<std::pair<double, double>> chain, unit_chain;
    for (int i = 0; i <= n; ++i) {
        chain.emplace_back(1.2 * i, 0.0);
        unit_chain.emplace_back(double(i), 0.0);
    }
    CHECK(thinning::f2(cloud2(chain), g, {n}).empty());
    CHECK(thinning::f2(cloud2(chain), g, {n + 1}).size() == std::size_t(n + 1));
    // gap 1 puts next-but-one neighbours at exactly 2r: f2 refuses, thin empties it
    CHECK_THROWS_AS(thinning::f2(cloud2(unit_chain), g, {n}), ParameterError);
    CHECK(thinning::thin(cloud2(unit_chain), g, {n}).empty());
    CHECK_THROWS_AS(thinning::f2(cloud2({{0, 0}, {0.01, 0}}), g, {10}), ParameterError);
}

TEST_CASE("thin of empty cloud and invalid level") {
    CHECK(thinning::thin(PointCloud(2, box2(0, 0, 1, 1), {}), {0.3}, {3}).empty());
    CHECK_THROWS_AS(thinning::thin(cloud2({{0, 0}}), {0.3}, {0}), ParameterError);
}

TEST_CASE("thinning properties on random clouds") {
    const GeometryParams g{0.3};
    const Point t{3.25, -1.5, 0.0};
    for (int n : {2, 5, 10}) {
        for (int s = 0; s < 100; ++s) {
            const auto x = process::sample_poisson(box2(0, 0, 10, 10), {1.0, std::uint64_t(1000 * n + s), 2});
            const auto y = thinning::thin(x, g, {n});
            CHECK(is_subset(y, x));
            CHECK(thinning::thin(y, g, {n}) == y);
            CHECK(thinning::thin(x.translated(t), g, {n}) == y.translated(t));
            CHECK(thinning::check_conditions(y, g, {n}).ok());
            const auto cert = geometry::certificate(n, g);
            const auto cs = geometry::clusters(y, g);
            for (const auto& c : cs.clusters) {
                CHECK(c.size() <= std::size_t(n));
                double diam = 0.0;
                for (auto i : c)
                    for (auto j : c) diam = std::max(diam, dist(y[i], y[j], 2));
                CHECK(diam + 2.0 * g.r <= cert.diameter_bound + 1e-12);
            }
        }
    }
}

TEST_CASE("check_conditions flags violations") {
    const GeometryParams g{1.0};
    const auto rep = thinning::check_conditions(cloud2({{0, 0}, {2.0, 0}, {4, 0}, {5.5, 0}}), g, {2});
    CHECK(rep.band_violations > 0);
    CHECK_FALSE(rep.ok());
    const auto big = thinning::check_conditions(cloud2({{0, 0}, {1, 0}, {2.5, 0}}), g, {2});
    CHECK(big.oversized_clusters == 1);
}

TEST_CASE("stability index") {
    const GeometryParams g{1.0};
    const Box win = box2(-3, -3, 8, 3);
    const auto rep = thinning::stability_index(cloud2({{0, 0}, {5, 0}}), g, win);
    CHECK(rep.N == 2);
    CHECK(rep.N_tilde >= 1);
    const auto empty = thinning::stability_index(PointCloud(2, box2(0, 0, 1, 1), {}), g, box2(0, 0, 1, 1));
    CHECK(empty.N == 1);
    CHECK_THROWS_AS(thinning::stability_index(cloud2({{0, 0}, {2, 0}}), g, win, 200), ParameterError);
}

}  // TEST_SUITE
