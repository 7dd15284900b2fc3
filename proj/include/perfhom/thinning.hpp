#pragma once

#include "perfhom/core.hpp"

namespace perfhom::thinning {

struct ThinningLevel {
    int n = 1;

    void validate() const {
        if (n < 1) throw ParameterError("thinning level n must be >= 1");
    }
};

// Keeps x iff no other point sits at a distance in (0, 1/n) or in
// (2r - 1/n, 2r + 1/n). Output keeps the input order and window.
PointCloud f1(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level);

// Keeps whole clusters with at most n points and delta_hat >= 1/n. The input
// must already satisfy the distance bands of f1; violations throw.
PointCloud f2(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level);

// f2 after f1.
PointCloud thin(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level);

// Checks the fixed-point characterisation of thinned clouds.
struct ConditionReport {
    std::size_t band_violations = 0;     // pairs inside a forbidden distance band
    std::size_t oversized_clusters = 0;  // clusters with more than n points
    std::size_t rough_clusters = 0;      // clusters with delta_hat < 1/n
    std::size_t overwide_clusters = 0;   // clusters whose Boolean model is wider than 2nr

    bool ok() const {
        return band_violations == 0 && oversized_clusters == 0 && rough_clusters == 0 && overwide_clusters == 0;
    }
};

ConditionReport check_conditions(const PointCloud& cloud, const GeometryParams& params, ThinningLevel level);

struct StabilityReport {
    Box window;
    int N = 0;        // smallest n with thin_n(x) and x agreeing on the window
    int N_tilde = 0;  // smallest n with equal filled rasters on the window
};

// Linear search over n = 1..cap. Throws ParameterError (non-admissible
// input) if either index exceeds the cap.
StabilityReport stability_index(const PointCloud& cloud, const GeometryParams& params, const Box& window,
                                int cap = 10000, double resolution = 0.0);

}  // namespace perfhom::thinning
