#include <doctest.h>

#include "dense_energy.hpp"
#include "perfhom/conductivity.hpp"
#include "perfhom/process.hpp"
#include "support.hpp"

using namespace perfhom;
using namespace perfhom::conductivity;
using namespace testing;

namespace {

VariationalProblem grid_problem(int n, int s) {
    VariationalProblem p;
    p.n = n;
    p.s = s;
    return p;
}

CellMask disk_hole(int cells, double radius) {
    auto m = full_mask(grid_problem(cells, 1), {0, 0, 0});
    for (std::size_t c = 0; c < m.size(); ++c) {
        const Point x = m.center(c);
        if (std::hypot(x[0] - cells / 2.0, x[1] - cells / 2.0) < radius) m.kept[c] = 0;
    }
    return m;
}

CellMask random_mask(Rng& rng, int cells, double keep) {
    auto m = full_mask(grid_problem(cells, 1), {0, 0, 0});
    for (auto& k : m.kept) k = rng.uniform() < keep ? 1 : 0;
    return m;
}

double e1(const CellMask& m) { return energy(m, {1, 0, 0}).energy; }

}  // namespace

TEST_SUITE("conductivity") {

TEST_CASE("rule names round trip") {
    for (auto r : {DomainRule::Strict, DomainRule::Center, DomainRule::Cover}) CHECK(parse_rule(to_string(r)) == r);
    CHECK_THROWS_AS(parse_rule("EDGE"), ParameterError);
    VariationalProblem p;
    p.s = 0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("no holes: unit energy and identity matrix") {
    const auto p = grid_problem(8, 2);
    const auto m = full_mask(p, {0, 0, 0});
    const auto r = energy(m, {1, 0, 0});
    CHECK(r.energy == 1.0);
    for (double v : r.corrector.v) CHECK(v == 0.0);
    const auto rep = effective_matrix(m, p);
    CHECK(rep.A[0][0] == doctest::Approx(1.0));
    CHECK(rep.A[1][1] == doctest::Approx(1.0));
    CHECK(std::abs(rep.A[0][1]) < 1e-12);
    CHECK(rep.alpha == doctest::Approx(1.0));
}

TEST_CASE("dense oracle: centred disk hole") {
    const auto m = disk_hole(8, 2.0);
    CHECK(e1(m) == doctest::Approx(dense_energy(m, {1, 0})).epsilon(1e-9));
    CHECK(energy(m, {0.6, -0.8, 0}).energy == doctest::Approx(dense_energy(m, {0.6, -0.8})).epsilon(1e-9));
}

TEST_CASE("dense oracle: random hole patterns") {
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        const auto m = random_mask(rng, 8, uniform(rng, 0.5, 0.95));
        CHECK(std::abs(e1(m) - dense_energy(m, {1, 0})) <= 1e-8);
    }
}

TEST_CASE("corrector vanishes on the box boundary") {
    const auto m = disk_hole(12, 3.0);
    const auto r = energy(m, {1, 0, 0});
    const int N = m.cells;
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i)
            if (i == 0 || j == 0 || i == N || j == N) CHECK(r.corrector.v[std::size_t(i + (N + 1) * j)] == 0.0);
    CHECK(r.corrector.residual <= 1e-9);
    CHECK(evaluate_energy(m, {1, 0, 0}, r.corrector.v) == doctest::Approx(r.energy).epsilon(1e-9));
}

TEST_CASE("centred disk hole is isotropic") {
    const auto m = disk_hole(16, 4.0);
    const auto rep = effective_matrix(m, grid_problem(16, 1));
    CHECK(std::abs(rep.A[0][0] - rep.A[1][1]) <= 1e-6);
    CHECK(std::abs(rep.A[0][1]) <= 1e-6);
}

TEST_CASE("energy is a quadratic form bounded by |eta|^2") {
    Rng rng(32);
    for (int t = 0; t < 10; ++t) {
        const auto m = random_mask(rng, 10, 0.8);
        const double a = energy(m, {1, 1, 0}).energy, b = energy(m, {1, -1, 0}).energy;
        const double x = energy(m, {1, 0, 0}).energy, y = energy(m, {0, 1, 0}).energy;
        CHECK(std::abs(a + b - 2 * x - 2 * y) <= 1e-8);
        for (double e : {x, y}) {
            CHECK(e >= 0.0);
            CHECK(e <= double(m.kept_count()) / m.size() + 1e-12);
        }
        const auto rep = effective_matrix(m, grid_problem(10, 1));
        CHECK(rep.A[0][1] == rep.A[1][0]);
        CHECK(rep.alpha >= -1e-8);
        CHECK(rep.alpha == doctest::Approx(std::min(rep.eigenvalues[0], rep.eigenvalues[1])));
    }
}

TEST_CASE("removing cells never raises the energy") {
    Rng rng(33);
    for (int t = 0; t < 10; ++t) {
        auto m = random_mask(rng, 10, 0.85);
        const double before = e1(m);
        for (int k = 0; k < 5; ++k) m.kept[rng() % m.size()] = 0;
        CHECK(e1(m) <= before + 1e-10);
    }
}

TEST_CASE("full-height slab decouples the two sides") {
    auto m = full_mask(grid_problem(8, 4), {0, 0, 0});
    auto left = m, right = m;
    for (std::size_t c = 0; c < m.size(); ++c) {
        const long i = long(c % std::size_t(m.cells));
        if (i >= 14 && i < 18) m.kept[c] = left.kept[c] = right.kept[c] = 0;
        if (i >= 14) left.kept[c] = 0;
        if (i < 18) right.kept[c] = 0;
    }
    const double slab = e1(m);
    CHECK(slab == doctest::Approx(e1(left) + e1(right)).epsilon(1e-9));
    CHECK(slab < 1.0);
    CHECK(slab < double(m.kept_count()) / m.size());
}

TEST_CASE("strict rule refinement is monotone") {
    Rng rng(34);
    for (int t = 0; t < 5; ++t) {
        std::vector<std::uint8_t> open(64);
        for (auto& o : open) o = rng.uniform() < 0.8;
        const percolation::LatticeField f(2, 8, open);
        const double coarse = e1(strict_mask(f, 2)), fine = e1(strict_mask(f, 4));
        CHECK(fine <= coarse + 1e-9);
    }
}

TEST_CASE("solver failure surfaces the residual") {
    const auto m = disk_hole(16, 4.0);
    try {
        energy(m, {1, 0, 0}, 1e-12, 1);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("cloud masks: rules are nested") {
    const auto cloud = process::sample_poisson(box2(0, 0, 10, 10), {1.0, 5, 2});
    const GeometryParams g{0.3};
    VariationalProblem p = grid_problem(8, 4);
    p.rule = DomainRule::Center;
    const auto center = cloud_mask(cloud, g, p);
    p.rule = DomainRule::Cover;
    const auto cover = cloud_mask(cloud, g, p);
    p.rule = DomainRule::Strict;
    p.k_scale = 1;
    const auto strict = cloud_mask(cloud, g, p);
    for (std::size_t c = 0; c < center.size(); ++c) {
        if (strict.kept[c]) CHECK(center.kept[c]);
        if (center.kept[c]) CHECK(cover.kept[c]);
    }
}

TEST_CASE("filled comparison: no islands gives identical reports") {
    const auto cloud = cloud2({{3, 3}, {6, 6}}, box2(0, 0, 10, 10));
    const auto cmp = compare_filled(cloud, {0.5}, grid_problem(8, 4));
    CHECK(cmp.island_cells == 0);
    CHECK(cmp.boolean.A == cmp.filled.A);
}

TEST_CASE("filled comparison: island-forcing triangle") {
    const double s = 1.9, h = s * std::sqrt(3.0) / 2.0;
    const auto cloud = cloud2({{3, 3}, {3 + s, 3}, {3 + s / 2, 3 + h}}, box2(0, 0, 9, 9));
    VariationalProblem p = grid_problem(6, 8);
    p.origin = Point{1.5, 1.5, 0};
    const auto cmp = compare_filled(cloud, {1.0}, p);
    CHECK(cmp.island_cells > 0);
    CHECK(cmp.filled.A[0][0] <= cmp.boolean.A[0][0] + 1e-10);
    CHECK(cmp.filled.A[1][1] <= cmp.boolean.A[1][1] + 1e-10);
}

TEST_CASE("channel bound: trivial cases") {
    const PointCloud empty(2, box2(0, 0, 10, 10), {});
    percolation::LatticeParams lp{2, 8, std::nullopt};
    const auto all_open = channel_bound_check(empty, {0.3}, lp, 2);
    CHECK(all_open.N == 8);
    CHECK(all_open.bound == 1.0);
    CHECK(all_open.energy == doctest::Approx(1.0));
    CHECK(all_open.holds);
    // a wall of centres blocks every column-4 cube
    std::vector<std::pair<double, double>> wall;
    for (int k = 0; k <= 20; ++k) wall.emplace_back(2.55, 0.3 + 0.2 * k);
    const auto blocked = channel_bound_check(cloud2(wall, box2(0, 0, 6, 6)), {0.3}, {2, 8, Point{0.3, 0.3, 0}}, 2);
    CHECK(blocked.N == 0);
    CHECK(blocked.bound == 0.0);
}

TEST_CASE("channel bound holds on subcritical samples") {
    const GeometryParams g{0.3};
    const int k = percolation::LatticeParams::default_k_scale(0.599, 0.3, 2);
    for (int s = 0; s < 10; ++s) {
        const double L = 16.0 / k;
        const auto cloud = process::sample_poisson(box2(0, 0, L + 0.6, L + 0.6), {1.0, std::uint64_t(100 + s), 2});
        const auto rec = channel_bound_check(cloud, g, {k, 16, std::nullopt}, 4);
        CHECK(rec.holds);
        CHECK(rec.energy >= rec.bound - 1e-8);
    }
}

TEST_CASE("3D energy") {
    VariationalProblem p = grid_problem(4, 2);
    p.dim = 3;
    auto m = full_mask(p, {0, 0, 0});
    CHECK(energy(m, {0, 0, 1}).energy == 1.0);
    m.kept[m.size() / 2] = 0;
    const auto rep = effective_matrix(m, p);
    CHECK(rep.alpha < 1.0);
    CHECK(rep.alpha > 0.5);
}

}  // TEST_SUITE
