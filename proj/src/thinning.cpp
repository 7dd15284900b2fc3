#include "perfhom/thinning.hpp"

#include "perfhom/geometry.hpp"

namespace perfhom::thinning {

namespace {

bool in_band(double d, double two_r, double inv_n) {
    return (d > 0.0 && d < inv_n) || (d > two_r - inv_n && d < two_r + inv_n);
}

// Marks points that have a neighbour in a forbidden band.
std::vector<bool> band_flags(const PointCloud& cloud, const GeometryParams& params, int n, std::size_t* pairs) {
    const auto& pts = cloud.points();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double two_r = 2.0 * params.r;
    const double reach = std::max(two_r + inv_n, inv_n);
    std::vector<bool> flagged(pts.size(), false);
    if (pts.empty()) return flagged;
    NeighborGrid grid(pts, cloud.dim(), reach);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        grid.for_each_within(pts[i], reach, [&](std::size_t j, double d2) {
            if (j == i) return;
            if (in_band(std::sqrt(d2), two_r, inv_n)) {
                flagged[i] = true;
                if (pairs && j > i) ++*pairs;
            }
        });
    }
    return flagged;
}

double boolean_diameter(const PointCloud& cloud, const std::vector<std::size_t>& members, double r) {
    double d2 = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            d2 = std::max(d2, dist2(cloud[members[a]], cloud[members[b]], cloud.dim()));
    return std::sqrt(d2) + 2.0 * r;
}

std::vector<Point> gather(const PointCloud& cloud, const std::vector<std::size_t>& members) {
    std::vector<Point> pts;
    pts.reserve(members.size());
    for (std::size_t i : members) pts.push_back(cloud[i]);
    return pts;
}

}  // namespace

PointCloud f1(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level) {
    params.validate();
    level.validate();
    const auto flagged = band_flags(cloud, params, level.n, nullptr);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (!flagged[i]) keep.push_back(i);
    return cloud.subset(keep);
}

PointCloud f2(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level) {
    params.validate();
    level.validate();
    std::size_t pairs = 0;
    band_flags(cloud, params, level.n, &pairs);
    if (pairs > 0) throw ParameterError("f2 requires a cloud that already satisfies the f1 distance bands");
    if (cloud.dim() != 2 && !cloud.empty())
        throw UnsupportedDimension("cluster smoothness estimate is only available in 2D");

    const double inv_n = 1.0 / static_cast<double>(level.n);
    const auto cs = geometry::clusters(cloud, params);
    std::vector<bool> keep_cluster(cs.size(), false);
    for (std::size_t c = 0; c < cs.size(); ++c) {
        const auto& members = cs.clusters[c];
        if (members.size() > static_cast<std::size_t>(level.n)) continue;
        keep_cluster[c] = geometry::delta_hat(gather(cloud, members), cloud.dim(), params).value >= inv_n;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (keep_cluster[cs.cluster_of[i]]) keep.push_back(i);
    return cloud.subset(keep);
}

PointCloud thin(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level) {
    return f2(f1(cloud, params, level), params, level);
}

ConditionReport check_conditions(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level) {
    params.validate();
    level.validate();
    ConditionReport rep;
    band_flags(cloud, params, level.n, &rep.band_violations);
    if (cloud.empty()) return rep;
    const auto cert = geometry::certificate(level.n, params);
    const auto cs = geometry::clusters(cloud, params);
    for (const auto& members : cs.clusters) {
        if (members.size() > static_cast<std::size_t>(level.n)) ++rep.oversized_clusters;
        if (cloud.dim() == 2 && geometry::delta_hat(gather(cloud, members), 2, params).value < cert.delta)
            ++rep.rough_clusters;
        if (boolean_diameter(cloud, members, params.r) > cert.diameter_bound) ++rep.overwide_clusters;
    }
    return rep;
}

StabilityReport stability_index(const PointCloud& cloud, const GeometryParams& params, const Box& window, int cap,
                                double resolution) {
    params.validate();
    if (resolution <= 0.0) resolution = geometry::default_resolution(params);
    const int dim = cloud.dim();
    StabilityReport rep;
    rep.window = window;

    std::size_t inside = 0;
    for (const auto& p : cloud.points())
        if (window.contains(p, dim)) ++inside;

    const auto full = geometry::fill_region(cloud, params, resolution, window, window.lo);
    // Cells of the full raster whose centre lies in the window.
    std::vector<std::size_t> window_cells;
    for (std::size_t idx = 0; idx < full.cells().size(); ++idx)
        if (window.contains(full.frame().center(idx), dim)) window_cells.push_back(idx);

    auto points_agree = [&](const PointCloud& thinned) {
        std::size_t kept = 0;
        for (const auto& p : thinned.points())
            if (window.contains(p, dim)) ++kept;
        return kept == inside;
    };
    auto rasters_agree = [&](const PointCloud& thinned) {
        const auto part = geometry::fill_region(thinned, params, resolution, window, window.lo);
        for (std::size_t idx : window_cells) {
            const bool a = full.state(idx) != geometry::CellState::VacantUnbounded;
            const bool b = part.in_filled(full.frame().center(idx));
            if (a != b) return false;
        }
        return true;
    };

    for (int n = 1; n <= cap && (rep.N == 0 || rep.N_tilde == 0); ++n) {
        const PointCloud thinned = thin(cloud, params, {n});
        if (rep.N == 0 && points_agree(thinned)) rep.N = n;
        if (rep.N_tilde == 0 && rasters_agree(thinned)) rep.N_tilde = n;
    }
    if (rep.N == 0 || rep.N_tilde == 0)
        throw ParameterError("stability index exceeds cap " + std::to_string(cap) +
                             "; the cloud is not admissible (exact 2r pair or unbounded cluster)");
    return rep;
}

}  // namespace perfhom::thinning
