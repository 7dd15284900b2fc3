#include "perfhom/process.hpp"

#include <random>

#include "perfhom/geometry.hpp"

namespace perfhom::process {

void ProcessParams::validate() const {
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw ParameterError("intensity must be > 0");
    if (dim != 2 && dim != 3) throw UnsupportedDimension("process dimension must be 2 or 3");
}

void SubcriticalityConfig::require(const GeometryParams& g) const {
    if (!subcritical(g))
        throw ParameterError("radius r = " + std::to_string(g.r) + " is not below the configured r_c = " +
                             std::to_string(r_c));
}

PointCloud sample_poisson(const Box& window, const ProcessParams& params) {
    Rng rng(params.seed);
    return sample_poisson(window, params, rng);
}

PointCloud sample_poisson(const Box& window, const ProcessParams& params, Rng& rng) {
    params.validate();
    const int dim = params.dim;
    const double volume = window.volume(dim);
    if (!(volume > 0.0)) return PointCloud(dim, window, {});

    std::poisson_distribution<long> count_dist(params.intensity * volume);
    const long count = count_dist(rng);
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        Point p{0.0, 0.0, 0.0};
        for (int k = 0; k < dim; ++k) p[k] = window.lo[k] + rng.uniform() * window.side(k);
        pts.push_back(p);
    }
    // Ties have probability ~2^-53 per pair; drop them rather than fail.
    std::vector<Point> sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        std::vector<Point> unique_pts;
        for (const auto& p : pts)
            if (std::find(unique_pts.begin(), unique_pts.end(), p) == unique_pts.end()) unique_pts.push_back(p);
        pts = std::move(unique_pts);
    }
    return PointCloud::unchecked(dim, window, std::move(pts));
}

AdmissibilityReport admissibility_report(const PointCloud& cloud, const GeometryParams& params, double tolerance) {
    params.validate();
    AdmissibilityReport rep;
    const auto& pts = cloud.points();
    const int dim = cloud.dim();
    const double two_r = 2.0 * params.r;
    if (pts.empty()) return rep;

    rep.min_pair_gap_to_2r = std::numeric_limits<double>::infinity();
    bool any_pair = false;
    NeighborGrid grid(pts, dim, two_r);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        grid.for_each_within(pts[i], 2.0 * two_r, [&](std::size_t j, double d2) {
            if (j <= i) return;
            any_pair = true;
            const double gap = std::abs(std::sqrt(d2) - two_r);
            rep.min_pair_gap_to_2r = std::min(rep.min_pair_gap_to_2r, gap);
            if (gap < tolerance) ++rep.equidistance_violations;
        });
    }
    // Pairs further apart than 4r have gap > 2r; only needed when no closer pair exists.
    if (!any_pair && pts.size() >= 2) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                rep.min_pair_gap_to_2r =
                    std::min(rep.min_pair_gap_to_2r, std::abs(dist(pts[i], pts[j], dim) - two_r));
    }

    const auto cs = geometry::clusters(cloud, params);
    for (const auto& cl : cs.clusters) {
        rep.max_cluster_size = std::max(rep.max_cluster_size, cl.size());
        double d2max = 0.0;
        for (std::size_t a = 0; a < cl.size(); ++a)
            for (std::size_t b = a + 1; b < cl.size(); ++b) d2max = std::max(d2max, dist2(pts[cl[a]], pts[cl[b]], dim));
        rep.max_cluster_diameter = std::max(rep.max_cluster_diameter, std::sqrt(d2max) + two_r);
    }
    return rep;
}

}  // namespace perfhom::process
