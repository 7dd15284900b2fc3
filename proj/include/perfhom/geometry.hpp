#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "perfhom/core.hpp"

namespace perfhom::geometry {

// Partition of a cloud into overlap clusters: points i and j are linked when
// |p_i - p_j| < 2r, and clusters are the transitive closure. Clusters are
// ordered by their smallest member index, members ascending; the cluster id
// of a point is the position of its cluster in that order.
struct ClusterSet {
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> cluster_of;

    std::size_t size() const noexcept { return clusters.size(); }
};

ClusterSet clusters(const PointCloud& cloud, const GeometryParams& params);

// Closed Boolean model membership: distance to the nearest centre <= r.
bool covered(const Point& point, const PointCloud& cloud, const GeometryParams& params);

// Reusable membership index for many queries against one cloud.
class CoverageIndex {
  public:
    CoverageIndex(const PointCloud& cloud, const GeometryParams& params);

    bool covered(const Point& p) const;
    // Squared distance to the nearest centre within `radius`, or +inf.
    double nearest_dist2(const Point& p, double radius) const;
    const PointCloud& cloud() const noexcept { return *cloud_; }
    double r() const noexcept { return r_; }

  private:
    const PointCloud* cloud_;
    double r_;
    NeighborGrid grid_;
};

enum class CellState : std::uint8_t { Covered = 0, VacantUnbounded = 1, VacantIsland = 2 };

// Regular grid of cells with side h; cell (i, j, k) spans
// origin + [i, i+1] x [j, j+1] x [k, k+1] times h.
struct RasterFrame {
    int dim = 2;
    Point origin{0.0, 0.0, 0.0};
    double h = 1.0;
    std::array<long, 3> shape{1, 1, 1};

    std::size_t cell_count() const {
        return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) *
               static_cast<std::size_t>(shape[2]);
    }
    std::size_t index(long i, long j, long k = 0) const {
        return static_cast<std::size_t>(i + shape[0] * (j + shape[1] * k));
    }
    std::array<long, 3> unflatten(std::size_t idx) const;
    Point center(std::size_t idx) const;
    // Index of the cell containing p, or nullopt outside the frame.
    std::optional<std::size_t> locate(const Point& p) const;
};

// Raster of the filled-up Boolean model. Covered cells have their centre in
// the Boolean model; vacant cells are split by a flood fill from the frame
// boundary (4-neighbourhood in 2D, 6 in 3D) into the unbounded component and
// islands.
class FilledRaster {
  public:
    FilledRaster(RasterFrame frame, std::vector<CellState> cells)
        : frame_(frame), cells_(std::move(cells)) {}

    const RasterFrame& frame() const noexcept { return frame_; }
    const std::vector<CellState>& cells() const noexcept { return cells_; }
    CellState state(std::size_t idx) const { return cells_[idx]; }

    // Queries outside the frame report VacantUnbounded.
    CellState state_at(const Point& p) const;
    bool in_filled(const Point& p) const { return state_at(p) != CellState::VacantUnbounded; }
    bool in_boolean(const Point& p) const { return state_at(p) == CellState::Covered; }

    std::size_t count(CellState s) const;

    // Re-walks every VacantUnbounded cell to the frame boundary; false if
    // any such cell has no vacant path out.
    bool verify_unbounded_reachability() const;

  private:
    FilledRaster() = default;
    RasterFrame frame_;
    std::vector<CellState> cells_;
};

// Rasterises the filled model over the cloud window padded by r plus the
// largest cluster extent, so windows are never cut through an enclosing
// cluster. With `anchor`, cell corners sit on anchor + integer multiples of
// the resolution, which lets callers share grids with other modules.
FilledRaster fill(const PointCloud& cloud, const GeometryParams& params, double resolution,
                  std::optional<Point> anchor = std::nullopt);

// Same, but restricted to (at least) the given region instead of the window.
FilledRaster fill_region(const PointCloud& cloud, const GeometryParams& params, double resolution,
                         const Box& region, std::optional<Point> anchor = std::nullopt);

// Residual (uncovered) arc of circle `circle`, counter-clockwise from
// `start` over `length` radians.
struct Arc {
    std::size_t circle = 0;
    double start = 0.0;
    double length = 0.0;

    Point point_at(const std::vector<Point>& centers, double r, double t) const;
};

struct Corner {
    Point p{0.0, 0.0, 0.0};
    std::size_t i = 0;
    std::size_t j = 0;
};

// Boundary of a union of equal disks in the plane.
struct DiskUnionBoundary {
    std::vector<Arc> arcs;
    std::vector<Corner> corners;
};

DiskUnionBoundary disk_union_boundary(const std::vector<Point>& centers, double r);

// Distance from p to a circular arc.
double distance_to_arc(const Point& p, const Arc& arc, const std::vector<Point>& centers, double r);
// Minimum distance between two arcs (on different or equal circles).
double distance_between_arcs(const Arc& a, const Arc& b, const std::vector<Point>& centers, double r);

struct DeltaEstimate {
    double value = 0.0;
    std::size_t corner_count = 0;
    bool conservative = true;
};

// Conservative lower bound for the Lipschitz-graph radius of a 2D disk
// cluster's boundary. Corner terms use the distance to the nearest other
// boundary feature, the half-chord r cos(alpha/2) and the r/sqrt(2) cap; a
// further term covers narrow gaps between non-adjacent arcs.
DeltaEstimate delta_hat(const std::vector<Point>& cluster_points, int dim, const GeometryParams& params);

struct SmoothnessCertificate {
    double delta = 0.0;
    double lipschitz_bound = 0.0;
    double diameter_bound = 0.0;
};

SmoothnessCertificate certificate(int n, const GeometryParams& params);

// Default raster resolution r / 8.
inline double default_resolution(const GeometryParams& params) { return params.r / 8.0; }

}  // namespace perfhom::geometry
