#pragma once

#include <cstdint>

#include "perfhom/core.hpp"

namespace perfhom::process {

struct ProcessParams {
    double intensity = 1.0;  // points per unit volume
    std::uint64_t seed = 0;
    int dim = 2;

    void validate() const;
};

// The critical radius is supplied by the user; it is never estimated here.
struct SubcriticalityConfig {
    double r_c = 0.599;

    bool subcritical(const GeometryParams& g) const { return g.r < r_c; }
    // Throws ParameterError unless r < r_c.
    void require(const GeometryParams& g) const;
};

struct AdmissibilityReport {
    // min over pairs of | |x - y| - 2r |; +inf when the cloud has < 2 points.
    double min_pair_gap_to_2r = 0.0;
    std::size_t max_cluster_size = 0;
    // Largest diameter of a cluster's Boolean model (point diameter + 2r).
    double max_cluster_diameter = 0.0;
    std::size_t equidistance_violations = 0;
};

// Stationary Poisson process in `window`: Poisson(lambda |W|) points, i.i.d.
// uniform positions. Fully determined by params.seed.
PointCloud sample_poisson(const Box& window, const ProcessParams& params);

// Same, drawing from an existing stream (replica substreams).
PointCloud sample_poisson(const Box& window, const ProcessParams& params, Rng& rng);

AdmissibilityReport admissibility_report(const PointCloud& cloud, const GeometryParams& params, double tolerance);

inline double default_equidistance_tolerance(const GeometryParams& g) { return 1e-12 * g.r; }

}  // namespace perfhom::process
