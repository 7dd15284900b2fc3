#pragma once

#include <optional>
#include <vector>

#include "perfhom/core.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/process.hpp"
#include "perfhom/thinning.hpp"

namespace perfhom::stats {

// Replicas are sampled on `window` inflated by a margin and estimated on
// `window` only (minus-sampling).
struct StudyWindow {
    Box window{{0.0, 0.0, 0.0}, {20.0, 20.0, 0.0}};
    std::size_t replicas = 200;
};

struct EstimatorReport {
    double estimate = 0.0;
    double se = 0.0;  // standard error of the mean over replicas
    std::size_t replicas = 0;
    Box window;
    double margin = 0.0;
    std::vector<double> values;  // per replica

    double ci_lo(double z = 1.959963984540054) const { return estimate - z * se; }
    double ci_hi(double z = 1.959963984540054) const { return estimate + z * se; }
};

EstimatorReport summarize(std::vector<double> values, const Box& window, double margin);

// Margin that makes the thinned process on the window independent of
// points outside the sampled region: 2nr plus the f1 interaction range.
double thinning_margin(const GeometryParams& geometry, std::optional<thinning::ThinningLevel> level);

struct IntensityRow {
    int n = 0;  // 0: unthinned
    EstimatorReport report;
};

struct IntensityLadder {
    IntensityRow unthinned;
    std::vector<IntensityRow> rows;
    std::size_t subset_violations = 0;  // replicas with count(thinned) > count(unthinned)
};

// Mean number of points per unit area in the window.
EstimatorReport estimate_point_intensity(const process::ProcessParams& process, const GeometryParams& geometry,
                                         std::optional<thinning::ThinningLevel> level, const StudyWindow& study);

// All levels evaluated on the same realisations.
IntensityLadder intensity_ladder(const process::ProcessParams& process, const GeometryParams& geometry,
                                 const std::vector<int>& levels, const StudyWindow& study);

// Boundary length of the filled model inside `window`, computed from exact
// circular arcs. Arcs are attributed to the filled boundary when the raster
// cell just outside their midpoint belongs to the unbounded vacant component.
struct PerimeterResult {
    double length = 0.0;
    std::size_t arcs = 0;           // residual arcs of the Boolean model
    std::size_t boundary_arcs = 0;  // arcs on the filled boundary
    std::size_t island_arcs = 0;    // arcs bordering islands only
    std::size_t ambiguous_arcs = 0; // no vacant probe found; counted as boundary
};

PerimeterResult filled_perimeter(const PointCloud& cloud, const GeometryParams& geometry, const Box& window,
                                 double resolution = 0.0);

// Length of the uncovered boundary of the Boolean model inside `window`
// (island boundaries included).
double boolean_perimeter(const PointCloud& cloud, const GeometryParams& geometry, const Box& window);

struct SurfaceIntensityEstimate {
    EstimatorReport report;  // perimeter per unit area
    std::size_t arcs = 0;
    std::size_t boundary_arcs = 0;
    std::size_t island_arcs = 0;
    std::size_t ambiguous_arcs = 0;
};

SurfaceIntensityEstimate estimate_surface_intensity(const process::ProcessParams& process,
                                                    const GeometryParams& geometry,
                                                    std::optional<thinning::ThinningLevel> level,
                                                    const StudyWindow& study);

// Fraction of the window not covered by the Boolean model (filled = false)
// or the filled model (true), from raster cell centres.
double vacant_fraction(const PointCloud& cloud, const GeometryParams& geometry, const Box& window, bool filled,
                       double resolution = 0.0);

EstimatorReport estimate_vacancy(const process::ProcessParams& process, const GeometryParams& geometry,
                                 std::optional<thinning::ThinningLevel> level, bool filled, const StudyWindow& study,
                                 double resolution = 0.0);

}  // namespace perfhom::stats
