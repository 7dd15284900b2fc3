#include "perfhom/stats.hpp"

#include <numbers>

namespace perfhom::stats {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unthinned filled models depend on whole clusters; subcritical clusters
// rarely exceed a few radii, so ten diameters is a generous margin.
double filled_margin(const GeometryParams& geometry, std::optional<thinning::ThinningLevel> level) {
    if (level) return thinning_margin(geometry, level);
    return 20.0 * geometry.r;
}

PointCloud realise(const process::ProcessParams& process, const Box& sample_window, std::size_t replica) {
    Rng rng = Rng(process.seed).substream(replica);
    return process::sample_poisson(sample_window, process, rng);
}

std::size_t count_in(const PointCloud& cloud, const Box& window) {
    std::size_t c = 0;
    for (const auto& p : cloud.points())
        if (window.contains(p, cloud.dim())) ++c;
    return c;
}

// Length of the part of an arc lying in the window.
double clipped_length(const geometry::Arc& arc, const std::vector<Point>& centers, double r, const Box& window) {
    const Point& c = centers[arc.circle];
    std::vector<double> cuts{0.0, arc.length};
    auto add_line = [&](int axis, double value) {
        const double q = (value - c[axis]) / r;
        if (q < -1.0 || q > 1.0) return;
        const double base = axis == 0 ? std::acos(q) : std::asin(q);
        const double cands[2] = {base, axis == 0 ? -base : std::numbers::pi - base};
        for (double a : cands) {
            double t = std::fmod(a - arc.start, kTwoPi);
            if (t < 0.0) t += kTwoPi;
            if (t > 0.0 && t < arc.length) cuts.push_back(t);
        }
    };
    add_line(0, window.lo[0]);
    add_line(0, window.hi[0]);
    add_line(1, window.lo[1]);
    add_line(1, window.hi[1]);
    std::sort(cuts.begin(), cuts.end());
    double len = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double a = cuts[i - 1], b = cuts[i];
        if (b <= a) continue;
        if (window.contains(arc.point_at(centers, r, 0.5 * (a + b)), 2)) len += (b - a) * r;
    }
    return len;
}

template <typename Fn>
void for_each_cluster_arc(const PointCloud& cloud, const GeometryParams& geometry, Fn&& fn) {
    const auto cs = geometry::clusters(cloud, geometry);
    for (const auto& members : cs.clusters) {
        std::vector<Point> centers;
        centers.reserve(members.size());
        for (std::size_t i : members) centers.push_back(cloud[i]);
        const auto boundary = geometry::disk_union_boundary(centers, geometry.r);
        for (const auto& arc : boundary.arcs) fn(arc, centers);
    }
}

}  // namespace

EstimatorReport summarize(std::vector<double> values, const Box& window, double margin) {
    EstimatorReport rep;
    rep.window = window;
    rep.margin = margin;
    rep.replicas = values.size();
    if (!values.empty()) {
        double sum = 0.0;
        for (double v : values) sum += v;
        rep.estimate = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - rep.estimate) * (v - rep.estimate);
            rep.se = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
        }
    }
    rep.values = std::move(values);
    return rep;
}

double thinning_margin(const GeometryParams& geometry, std::optional<thinning::ThinningLevel> level) {
    if (!level) return geometry.r;
    const double n = static_cast<double>(level->n);
    return 2.0 * n * geometry.r + 2.0 * geometry.r + 1.0 / n;
}

EstimatorReport estimate_point_intensity(const process::ProcessParams& process, const GeometryParams& geometry,
                                         std::optional<thinning::ThinningLevel> level, const StudyWindow& study) {
    std::vector<int> levels;
    if (level) levels.push_back(level->n);
    const auto ladder = intensity_ladder(process, geometry, levels, study);
    return level ? ladder.rows.front().report : ladder.unthinned.report;
}

IntensityLadder intensity_ladder(const process::ProcessParams& process, const GeometryParams& geometry,
                                 const std::vector<int>& levels, const StudyWindow& study) {
    process.validate();
    geometry.validate();
    const int dim = process.dim;
    double margin = geometry.r;
    for (int n : levels) margin = std::max(margin, thinning_margin(geometry, thinning::ThinningLevel{n}));
    const Box sample_window = study.window.inflated(margin, dim);
    const double area = study.window.volume(dim);
    if (!(area > 0.0)) throw ParameterError("study window must have positive volume");

    const std::size_t R = study.replicas;
    std::vector<double> base(R);
    std::vector<std::vector<double>> thinned(levels.size(), std::vector<double>(R));
    std::vector<std::uint8_t> violation(R, 0);
    parallel_for(R, [&](std::size_t i) {
        const PointCloud cloud = realise(process, sample_window, i);
        const std::size_t c0 = count_in(cloud, study.window);
        base[i] = static_cast<double>(c0) / area;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const std::size_t c = count_in(thinning::thin(cloud, geometry, {levels[l]}), study.window);
            thinned[l][i] = static_cast<double>(c) / area;
            if (c > c0) violation[i] = 1;
        }
    });

    IntensityLadder out;
    out.unthinned = {0, summarize(base, study.window, margin)};
    for (std::size_t l = 0; l < levels.size(); ++l)
        out.rows.push_back({levels[l], summarize(thinned[l], study.window, margin)});
    out.subset_violations = static_cast<std::size_t>(std::count(violation.begin(), violation.end(), 1));
    return out;
}

PerimeterResult filled_perimeter(const PointCloud& cloud, const GeometryParams& geometry, const Box& window,
                                 double resolution) {
    if (cloud.dim() != 2) throw UnsupportedDimension("surface measure is computed in 2D");
    geometry.validate();
    if (resolution <= 0.0) resolution = geometry::default_resolution(geometry);
    PerimeterResult out;
    if (cloud.empty()) return out;
    const auto raster = geometry::fill_region(cloud, geometry, resolution, window, window.lo);
    const double r = geometry.r;

    for_each_cluster_arc(cloud, geometry, [&](const geometry::Arc& arc, const std::vector<Point>& centers) {
        ++out.arcs;
        const double len = clipped_length(arc, centers, r, window);
        // Probe just outside the arc, middle first, until a vacant cell is hit.
        const double offsets[2] = {0.75 * resolution, 0.25 * resolution};
        const double fractions[5] = {0.5, 0.3, 0.7, 0.1, 0.9};
        std::optional<geometry::CellState> state;
        for (double off : offsets) {
            for (double fr : fractions) {
                const double a = arc.start + fr * arc.length;
                const Point& c = centers[arc.circle];
                const Point probe{c[0] + (r + off) * std::cos(a), c[1] + (r + off) * std::sin(a), 0.0};
                const auto s = raster.state_at(probe);
                if (s != geometry::CellState::Covered) {
                    state = s;
                    break;
                }
            }
            if (state) break;
        }
        if (!state) {
            ++out.ambiguous_arcs;
            ++out.boundary_arcs;
            out.length += len;
        } else if (*state == geometry::CellState::VacantUnbounded) {
            ++out.boundary_arcs;
            out.length += len;
        } else {
            ++out.island_arcs;
        }
    });
    return out;
}

double boolean_perimeter(const PointCloud& cloud, const GeometryParams& geometry, const Box& window) {
    if (cloud.dim() != 2) throw UnsupportedDimension("surface measure is computed in 2D");
    geometry.validate();
    double total = 0.0;
    for_each_cluster_arc(cloud, geometry, [&](const geometry::Arc& arc, const std::vector<Point>& centers) {
        total += clipped_length(arc, centers, geometry.r, window);
    });
    return total;
}

SurfaceIntensityEstimate estimate_surface_intensity(const process::ProcessParams& process,
                                                    const GeometryParams& geometry,
                                                    std::optional<thinning::ThinningLevel> level,
                                                    const StudyWindow& study) {
    process.validate();
    if (process.dim != 2) throw UnsupportedDimension("surface intensity is estimated in 2D");
    const double margin = filled_margin(geometry, level);
    const Box sample_window = study.window.inflated(margin, 2);
    const double area = study.window.volume(2);
    const std::size_t R = study.replicas;
    std::vector<double> values(R);
    std::vector<PerimeterResult> parts(R);
    parallel_for(R, [&](std::size_t i) {
        PointCloud cloud = realise(process, sample_window, i);
        if (level) cloud = thinning::thin(cloud, geometry, *level);
        parts[i] = filled_perimeter(cloud, geometry, study.window);
        values[i] = parts[i].length / area;
    });
    SurfaceIntensityEstimate out;
    out.report = summarize(values, study.window, margin);
    for (const auto& p : parts) {
        out.arcs += p.arcs;
        out.boundary_arcs += p.boundary_arcs;
        out.island_arcs += p.island_arcs;
        out.ambiguous_arcs += p.ambiguous_arcs;
    }
    return out;
}

double vacant_fraction(const PointCloud& cloud, const GeometryParams& geometry, const Box& window, bool filled,
                       double resolution) {
    geometry.validate();
    if (resolution <= 0.0) resolution = geometry::default_resolution(geometry);
    const int dim = cloud.dim();
    if (cloud.empty()) return 1.0;
    const auto raster = geometry::fill_region(cloud, geometry, resolution, window, window.lo);
    std::size_t total = 0, vacant = 0;
    const auto& frame = raster.frame();
    for (std::size_t idx = 0; idx < frame.cell_count(); ++idx) {
        if (!window.contains(frame.center(idx), dim)) continue;
        ++total;
        const auto s = raster.state(idx);
        if (filled ? s == geometry::CellState::VacantUnbounded : s != geometry::CellState::Covered) ++vacant;
    }
    if (total == 0) throw ParameterError("window smaller than one raster cell");
    return static_cast<double>(vacant) / static_cast<double>(total);
}

EstimatorReport estimate_vacancy(const process::ProcessParams& process, const GeometryParams& geometry,
                                 std::optional<thinning::ThinningLevel> level, bool filled, const StudyWindow& study,
                                 double resolution) {
    process.validate();
    const double margin = filled ? filled_margin(geometry, level) : thinning_margin(geometry, level);
    const Box sample_window = study.window.inflated(margin, process.dim);
    std::vector<double> values(study.replicas);
    parallel_for(study.replicas, [&](std::size_t i) {
        PointCloud cloud = realise(process, sample_window, i);
        if (level) cloud = thinning::thin(cloud, geometry, *level);
        values[i] = vacant_fraction(cloud, geometry, study.window, filled, resolution);
    });
    return summarize(values, study.window, margin);
}

}  // namespace perfhom::stats
