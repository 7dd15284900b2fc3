#include <doctest.h>

#include "channel_oracle.hpp"
#include "perfhom/percolation.hpp"
#include "perfhom/process.hpp"
#include "support.hpp"

using namespace perfhom;
using namespace perfhom::percolation;
using namespace testing;

namespace {

LatticeField all(int n, bool open, int dim = 2) {
    std::size_t size = 1;
    for (int k = 0; k < dim; ++k) size *= std::size_t(n);
    return LatticeField(dim, n, std::vector<std::uint8_t>(size, open ? 1 : 0));
}

}  // namespace

TEST_SUITE("percolation") {

TEST_CASE("default k_scale formula") {
    CHECK(LatticeParams::default_k_scale(0.599, 0.3, 2) == 11);
    CHECK(LatticeParams::default_k_scale(0.599, 0.3, 3) == int(std::ceil(2 * std::sqrt(3.0) / 0.299)) + 1);
    CHECK_THROWS_AS(LatticeParams::default_k_scale(0.3, 0.3, 2), ParameterError);
}

TEST_CASE("build_field: empty cloud is all open") {
    const PointCloud empty(2, box2(0, 0, 10, 10), {});
    LatticeParams lp{2, 8, Point{1, 1, 0}};
    const auto f = build_field(empty, {0.3}, lp);
    CHECK(std::count(f.open().begin(), f.open().end(), 1) == 64);
}

TEST_CASE("build_field: centroid ball blocks its cube only") {
    // cube side 1, half diagonal 0.707
    const auto cloud = cloud2({{2.5, 2.5}}, box2(0, 0, 6, 6));
    LatticeParams lp{1, 4, Point{1, 1, 0}};
    const auto f = build_field(cloud, {0.75}, lp);
    CHECK_FALSE(f.is_open(f.index(1, 1)));
    // edge neighbours are 0.5 away, the diagonal one 0.707: all within r
    CHECK_FALSE(f.is_open(f.index(0, 1)));
    CHECK_FALSE(f.is_open(f.index(0, 0)));
    CHECK(f.is_open(f.index(3, 3)));
}

TEST_CASE("build_field: coverage error") {
    const auto cloud = cloud2({{1, 1}}, box2(0, 0, 4, 4));
    LatticeParams lp{1, 4, Point{0, 0, 0}};
    CHECK_THROWS_AS(build_field(cloud, {0.3}, lp), CoverageError);
}

TEST_CASE("build_field agrees with a dense point-to-box scan") {
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        const auto cloud = uniform_cloud(rng, 150, box2(0, 0, 10, 10));
        LatticeParams lp{3, 24, std::nullopt};
        const GeometryParams g{0.3};
        const auto f = build_field(cloud, g, lp);
        for (std::size_t v = 0; v < f.size(); ++v) {
            const Box cube = f.cube(v);
            bool blocked = false;
            for (const auto& p : cloud.points()) blocked = blocked || cube.dist2_to(p, 2) <= g.r * g.r;
            CHECK(f.is_open(v) == !blocked);
        }
    }
}

TEST_CASE("channel counts on simple fields") {
    CHECK(count_channels(all(4, true)) == 4);
    CHECK(count_channels(all(4, false)) == 0);
    auto f = all(6, true);
    for (int y = 0; y < 6; ++y) f.set_open(f.index(3, y), false);
    CHECK(count_channels(f) == 0);
    CHECK(min_open_crossing(all(7, true)) == 7);
    CHECK(min_open_crossing(all(7, false)) == 0);
    CHECK(count_channels(all(1, true)) == 1);
}

TEST_CASE("max flow equals exhaustive enumeration on 4x4 fields") {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const auto f = random_field(rng, 4, uniform(rng, 0.3, 0.9));
        ChannelOracle oracle(f);
        CHECK(count_channels(f) == oracle.count());
    }
}

TEST_CASE("channels equal crossings and witnesses verify") {
    Rng rng(5);
    for (int n : {4, 8, 16, 32}) {
        for (int t = 0; t < 50; ++t) {
            const auto f = random_field(rng, n, uniform(rng, 0.1, 0.9));
            const auto rep = analyze(f);
            CHECK(rep.N == rep.L);
            CHECK(rep.N == count_channels(f, Augmentation::DepthFirst));
            CHECK(verify_channels(f, rep.channels));
            CHECK(int(rep.channels.size()) == rep.N);
            CHECK(verify_crossing(f, rep.crossing, rep.L));
        }
    }
}

TEST_CASE("witness checker rejects bad witnesses") {
    const auto f = all(4, true);
    auto ch = channel_witnesses(f);
    REQUIRE(ch.size() == 4);
    auto shared = ch;
    shared[1] = shared[0];
    CHECK_FALSE(verify_channels(f, shared));
    auto shortened = ch;
    shortened[0].pop_back();
    CHECK_FALSE(verify_channels(f, shortened));
    auto g = f;
    g.set_open(ch[2][1], false);
    CHECK_FALSE(verify_channels(g, ch));
}

TEST_CASE("blocking a vertex never increases N") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        auto f = random_field(rng, 12, uniform(rng, 0.4, 0.9));
        const int before = count_channels(f);
        f.set_open(rng() % f.size(), false);
        CHECK(count_channels(f) <= before);
    }
}

TEST_CASE("3D channels") {
    CHECK(count_channels(all(3, true, 3)) == 9);
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto f = random_field(rng, 5, 0.7, 3);
        const int n = count_channels(f);
        CHECK(n == count_channels(f, Augmentation::DepthFirst));
        CHECK(verify_channels(f, channel_witnesses(f)));
    }
    CHECK_THROWS_AS(min_open_crossing(all(3, true, 3)), UnsupportedDimension);
}

TEST_CASE("blocked clusters use l-infinity adjacency") {
    auto f = all(5, true);
    f.set_open(f.index(1, 1), false);
    f.set_open(f.index(2, 2), false);
    f.set_open(f.index(4, 4), false);
    const auto c = blocked_cluster(f, f.index(1, 1));
    CHECK(c.size() == 2);
    CHECK(vertex_diameter(f, c) == doctest::Approx(std::sqrt(2.0)));
    CHECK(blocked_cluster(f, f.index(0, 0)).empty());
}

TEST_CASE("wilson interval") {
    const auto w = wilson(50, 100);
    CHECK(w.p == 0.5);
    CHECK(w.ci_lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.ci_hi == doctest::Approx(0.5962).epsilon(1e-3));
    const auto z = wilson(0, 100);
    CHECK(z.ci_lo == 0.0);
    CHECK(z.ci_hi > 0.0);
}

TEST_CASE("decay table: tiny intensity gives no blocked paths") {
    LatticeParams lp{11, 20, std::nullopt};
    const auto tab = blocked_diameter_stats({1e-6, 1, 2}, {0.3}, lp, 200, 5);
    for (const auto& row : tab.rows)
        if (row.m >= 2) CHECK(row.estimate.p == 0.0);
}

TEST_CASE("decay table: doubling replicas shrinks the interval") {
    LatticeParams lp{11, 20, std::nullopt};
    const auto a = blocked_diameter_stats({1.0, 3, 2}, {0.3}, lp, 1000, 3);
    const auto b = blocked_diameter_stats({1.0, 3, 2}, {0.3}, lp, 2000, 3);
    const double wa = a.rows[0].estimate.ci_hi - a.rows[0].estimate.ci_lo;
    const double wb = b.rows[0].estimate.ci_hi - b.rows[0].estimate.ci_lo;
    CHECK(wb / wa == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("crossing probability limits") {
    const auto one = crossing_probability({1.0, 2, 2}, {0.3}, 11, 1.0, 50, {8, 16});
    for (const auto& row : one) CHECK(row.estimate.p == 1.0);
    // c1 = 0 needs a fully blocked crossing, impossible without blocked vertices
    const auto zero = crossing_probability({1e-6, 2, 2}, {0.3}, 11, 0.0, 50, {8, 16});
    for (const auto& row : zero) CHECK(row.estimate.p == 0.0);
}

TEST_CASE("crossing probability decreases with n at small c1") {
    const auto rows = crossing_probability({1.0, 9, 2}, {0.3}, 11, 0.05, 300, {8, 16, 32});
    CHECK(rows[0].estimate.p >= rows[1].estimate.p);
    CHECK(rows[1].estimate.p >= rows[2].estimate.p);
}

}  // TEST_SUITE
