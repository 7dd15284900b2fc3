#include <doctest.h>

#include "perfhom/process.hpp"
#include "support.hpp"

using namespace perfhom;
using namespace testing;

namespace {

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double ne = double(a.size()) * b.size() / (a.size() + b.size());
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_SUITE("process") {

TEST_CASE("Poisson count has mean lambda times area") {
    const Box w = box2(0, 0, 10, 10);
    double sum = 0.0;
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) sum += process::sample_poisson(w, {0.5, std::uint64_t(s), 2}).size();
    const double mean = sum / seeds;
    CHECK(std::abs(mean - 50.0) <= 3.0 * std::sqrt(50.0 / seeds));
}

TEST_CASE("points lie in the window and are reproducible") {
    const Box w = box2(-2, 1, 3, 4);
    const auto a = process::sample_poisson(w, {2.0, 99, 2});
    const auto b = process::sample_poisson(w, {2.0, 99, 2});
    CHECK(a == b);
    CHECK(a != process::sample_poisson(w, {2.0, 100, 2}));
    for (const auto& p : a.points()) CHECK(w.contains(p, 2));
}

TEST_CASE("zero-volume window gives an empty cloud") {
    CHECK(process::sample_poisson(box2(0, 0, 0, 5), {1.0, 1, 2}).empty());
}

TEST_CASE("3D sampling") {
    const Box w{{0, 0, 0}, {3, 3, 3}};
    const auto c = process::sample_poisson(w, {1.0, 5, 3});
    CHECK(c.dim() == 3);
    for (const auto& p : c.points()) CHECK(w.contains(p, 3));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(process::ProcessParams({0.0, 1, 2}).validate(), ParameterError);
    CHECK_THROWS_AS(process::ProcessParams({1.0, 1, 4}).validate(), ParameterError);
    CHECK_THROWS_AS(process::SubcriticalityConfig{0.2}.require({0.3}), ParameterError);
    CHECK_NOTHROW(process::SubcriticalityConfig{}.require({0.3}));
}

TEST_CASE("translated windows give the same count law") {
    std::vector<double> a, b;
    for (int s = 0; s < 10000; ++s) {
        a.push_back(double(process::sample_poisson(box2(0, 0, 4, 4), {1.0, std::uint64_t(s), 2}).size()));
        b.push_back(
            double(process::sample_poisson(box2(17.5, -3, 21.5, 1), {1.0, std::uint64_t(s + 50000), 2}).size()));
    }
    CHECK(ks_pvalue(a, b) > 0.01);
}

TEST_CASE("admissibility: exact 2r pair is a violation") {
    const auto rep = process::admissibility_report(cloud2({{0, 0}, {2, 0}}), {1.0}, 1e-9);
    CHECK(rep.equidistance_violations == 1);
    CHECK(rep.min_pair_gap_to_2r == doctest::Approx(0.0));
    CHECK(rep.max_cluster_size == 1);
}

TEST_CASE("admissibility: empty cloud") {
    const auto rep = process::admissibility_report(PointCloud(2, box2(0, 0, 1, 1), {}), {1.0}, 1e-9);
    CHECK(rep.equidistance_violations == 0);
    CHECK(rep.max_cluster_size == 0);
    CHECK(rep.max_cluster_diameter == 0.0);
}

TEST_CASE("admissibility: cluster diameter of a pair") {
    const auto rep = process::admissibility_report(cloud2({{0, 0}, {1.5, 0}, {5, 0}}), {1.0}, 1e-9);
    CHECK(rep.max_cluster_size == 2);
    CHECK(rep.max_cluster_diameter == doctest::Approx(3.5));
    CHECK(rep.min_pair_gap_to_2r == doctest::Approx(0.5));
}

TEST_CASE("admissibility: subcritical samples have no equidistant pairs") {
    const GeometryParams g{0.3};
    for (int s = 0; s < 100; ++s) {
        const auto c = process::sample_poisson(box2(0, 0, 20, 20), {1.0, std::uint64_t(s), 2});
        const auto rep = process::admissibility_report(c, g, process::default_equidistance_tolerance(g));
        CHECK(rep.equidistance_violations == 0);
        CHECK(std::isfinite(rep.max_cluster_diameter));
    }
}

TEST_CASE("substreams are independent of draw order") {
    Rng master(7);
    Rng a = master.substream(3);
    master();
    master();
    Rng b = master.substream(3);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

}  // TEST_SUITE
