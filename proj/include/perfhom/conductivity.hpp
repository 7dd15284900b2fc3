#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perfhom/core.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/percolation.hpp"

namespace perfhom::conductivity {

// Which grid cells take part in the energy.
//   Strict: cells inside open lattice cubes.
//   Center: cells whose centre is outside the exclusion set.
//   Cover:  cells not certainly inside the Boolean model; a cell is dropped
//           only if its centre is within r - (half diagonal) of a ball centre.
enum class DomainRule { Strict, Center, Cover };

std::string to_string(DomainRule rule);
DomainRule parse_rule(const std::string& name);

struct VariationalProblem {
    int dim = 2;
    int n = 16;        // lattice cubes per side
    int k_scale = 1;   // box side L = n / k_scale
    int s = 4;         // grid cells per lattice cube and axis
    DomainRule rule = DomainRule::Center;
    // Lower box corner; defaults to the cloud window corner shifted by r.
    std::optional<Point> origin;
    double tolerance = 1e-10;  // relative CG residual
    long max_iterations = 0;   // 0: automatic

    void validate() const;
    double side() const { return static_cast<double>(n) / static_cast<double>(k_scale); }
    int cells_per_axis() const { return n * s; }
    double cell_size() const { return side() / static_cast<double>(cells_per_axis()); }
};

// Kept cells of the box grid, N = n s cells per axis, stored x-fastest.
struct CellMask {
    int dim = 2;
    int cells = 0;
    double h = 1.0;
    Point origin{0.0, 0.0, 0.0};
    std::vector<std::uint8_t> kept;

    std::size_t size() const { return kept.size(); }
    Point center(std::size_t c) const;
    double side() const { return h * cells; }
    std::size_t kept_count() const;
};

CellMask full_mask(const VariationalProblem& problem, const Point& origin);
// Strict rule: cell kept iff the lattice vertex containing it is open.
CellMask strict_mask(const percolation::LatticeField& field, int s);
// Center or Cover rule against the Boolean model of `cloud`.
CellMask cloud_mask(const PointCloud& cloud, const GeometryParams& geometry, const VariationalProblem& problem);
// Also drops cells whose centre lies in an island of the filled model. The
// raster should share the grid (see filled_raster_for).
CellMask drop_islands(const CellMask& mask, const geometry::FilledRaster& filled);
// Filled raster whose cells coincide with the problem grid.
geometry::FilledRaster filled_raster_for(const PointCloud& cloud, const GeometryParams& geometry,
                                         const VariationalProblem& problem);
Point default_origin(const PointCloud& cloud, const GeometryParams& geometry, const VariationalProblem& problem);

struct CorrectorField {
    // Values on the (N+1)^d grid vertices, x-fastest; zero on the box boundary.
    std::vector<double> v;
    double residual = 0.0;
    long iterations = 0;
};

struct EnergyResult {
    double energy = 0.0;  // L^-d min E(v)
    CorrectorField corrector;
};

// Minimises sum over kept cells of the integral of |eta - grad v|^2 over
// multilinear v vanishing on the box boundary, by Jacobi-preconditioned CG.
EnergyResult energy(const CellMask& mask, const std::array<double, 3>& eta, double tolerance = 1e-10,
                    long max_iterations = 0);

// Direct evaluation of E(v) for a given vertex field (exact quadrature), normalised.
double evaluate_energy(const CellMask& mask, const std::array<double, 3>& eta, const std::vector<double>& v);

struct ConductivityReport {
    int dim = 2;
    std::array<std::array<double, 3>, 3> A{};
    double alpha = 0.0;
    std::array<double, 3> eigenvalues{};
    // Probed directions and their normalised energies.
    std::vector<std::pair<std::array<double, 3>, double>> energies;
    DomainRule rule = DomainRule::Center;
    int n = 0;
    int s = 0;
    int k_scale = 1;
    double kept_fraction = 0.0;
    std::uint64_t seed = 0;
};

ConductivityReport effective_matrix(const CellMask& mask, const VariationalProblem& problem);

struct FilledComparison {
    ConductivityReport boolean;
    ConductivityReport filled;
    std::array<std::array<double, 3>, 3> difference{};  // filled - boolean
    std::size_t island_cells = 0;                         // cells dropped only by filling
};

FilledComparison compare_filled(const PointCloud& cloud, const GeometryParams& geometry,
                                const VariationalProblem& problem);

struct BoundRecord {
    int N = 0;
    int n = 0;
    int dim = 2;
    double energy = 0.0;  // Cover rule, eta = e1
    double bound = 0.0;   // (N / n^(d-1))^2
    bool holds = true;
};

// Thrown when the channel lower bound fails by more than the solver tolerance.
class BoundViolation : public SolverError {
  public:
    explicit BoundViolation(const BoundRecord& rec);
    const BoundRecord& record() const noexcept { return record_; }

  private:
    BoundRecord record_;
};

// Cover-rule energy on the grid refining the lattice of `lattice` by s,
// compared with the channel count of the same lattice field.
BoundRecord channel_bound_check(const PointCloud& cloud, const GeometryParams& geometry,
                                const percolation::LatticeParams& lattice, int s, double tolerance = 1e-8);

}  // namespace perfhom::conductivity
