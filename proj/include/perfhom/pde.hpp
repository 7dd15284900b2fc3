#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "perfhom/core.hpp"
#include "perfhom/process.hpp"
#include "perfhom/thinning.hpp"

namespace perfhom::pde {

// Closed-form coefficient or datum, kept as data so it can be hashed and
// written to JSON. Kinds (parameters in `p`):
//   constant        p0
//   cos             p0 + p1 cos(pi k1 x) cos(pi k2 y), k1 = p2, k2 = p3
//   manufactured_u  exp(-t) cos(pi x)
//   manufactured_f  (pi^2 - 1) exp(-t) cos(pi x)
//   affine          p0 + p1 u             (scalar functions of u)
//   logistic        p0 u (1 - u)
struct ClosedForm {
    std::string kind = "constant";
    std::vector<double> p{0.0};

    double operator()(double t, double x, double y) const;
    double of_u(double u) const;
    std::string describe() const;
    static ClosedForm constant(double c) { return {"constant", {c}}; }
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

struct PdeParams {
    Rect Q;
    double T = 0.5;
    double dt = 1e-3;
    int cells_per_unit = 128;  // N_g
    ClosedForm u0 = ClosedForm::constant(0.0);
    ClosedForm f = ClosedForm::constant(0.0);
    ClosedForm A = ClosedForm::constant(1.0);  // function of u, clamped to [A_min, A_max]
    double A_min = 1.0;
    double A_max = 1.0;
    ClosedForm h = ClosedForm::constant(0.0);  // function of u
    double L_h = 0.0;                          // declared Lipschitz constant of h
    int picard_sweeps = 0;                     // 0: plain semi-implicit, at most 5
    double picard_bound = 1e-6;                // relative step residual that triggers rejection
    double cg_tolerance = 1e-10;
    bool keep_snapshots = true;

    void validate() const;
    double conductivity(double u) const;
    std::size_t step_count() const;
    // Stable hash of every field, written into snapshot sidecars.
    std::string hash() const;
};

enum class CellKind : std::uint8_t { Fluid = 0, Hole = 1 };
enum class FaceKind : std::uint8_t { Interior, OuterNeumann, HoleRobin };

struct Face {
    std::size_t a = 0;  // fluid cell (owner)
    std::size_t b = 0;  // neighbour (Interior: fluid, HoleRobin: hole; unused for OuterNeumann)
    FaceKind kind = FaceKind::Interior;
    double area = 0.0;
};

struct PerforatedGrid {
    Rect Q;
    int nx = 0, ny = 0;
    double h = 0.0;
    std::vector<CellKind> cells;  // x-fastest
    std::vector<Face> faces;

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i + nx * j); }
    Point center(std::size_t c) const;
    std::size_t fluid_count() const;
};

struct EpsScenario {
    double eps = 0.25;
    PointCloud cloud;  // unscaled cloud; its window must cover Q / eps padded by 2r + 2nr
    GeometryParams geometry;
    thinning::ThinningLevel level{5};
    bool apply_thinning = true;
};

// Cells of Q at N_g per unit, all fluid.
PerforatedGrid plain_grid(const PdeParams& params);
PerforatedGrid build_perforated_grid(const EpsScenario& scenario, const PdeParams& params);

struct HomogenizedCoefficients {
    double C1 = 1.0;                                 // vacancy probability
    double C2 = 0.0;                                 // surface intensity
    std::array<std::array<double, 2>, 2> A{{{1.0, 0.0}, {0.0, 1.0}}};

    void validate() const;
};

// Monte Carlo estimates of the homogenized coefficients for a thinned
// Poisson process: C1 from the vacancy of the filled model, C2 from the
// filled boundary length per area, A from Center-rule box energies on the
// filled model averaged over replicas.
struct CoefficientOptions {
    Box stats_window{{0.0, 0.0, 0.0}, {20.0, 20.0, 0.0}};
    std::size_t stats_replicas = 50;
    int box_n = 32;  // conductivity box side (k_scale = 1)
    int box_s = 8;
    std::size_t box_replicas = 4;
};

struct CoefficientEstimate {
    HomogenizedCoefficients coeffs;
    double C1_se = 0.0;
    double C2_se = 0.0;
    std::array<std::array<double, 2>, 2> A_se{};
};

CoefficientEstimate estimate_coefficients(const process::ProcessParams& process, const GeometryParams& geometry,
                                          std::optional<thinning::ThinningLevel> level,
                                          const CoefficientOptions& options = {});

enum class InitialScaling { Paper, Plain };
std::string to_string(InitialScaling s);
InitialScaling parse_initial_scaling(const std::string& name);

struct StepDiagnostics {
    double t = 0.0;
    double l2_norm = 0.0;   // over fluid cells
    double energy = 0.0;    // sum over faces of A_face |jump|^2
    double mass = 0.0;      // sum of (mass weight) u h^2
    int cg_iterations = 0;
    int picard_sweeps = 0;
};

struct PdeSolution {
    int nx = 0, ny = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> snapshots;  // cell values, holes = NaN in the eps solver
    std::vector<StepDiagnostics> diagnostics;    // one per time level, including t = 0
    double grad_l2l2 = 0.0;                      // sum over steps of dt * energy
};

// Called for every time level k (0..K) with the cell values.
using Observer = std::function<void(std::size_t k, double t, const std::vector<double>& u)>;

PdeSolution solve_eps(const PerforatedGrid& grid, const PdeParams& params, double eps, const Observer& observer = {});
PdeSolution solve_homogenized(const HomogenizedCoefficients& coeffs, const PdeParams& params,
                              InitialScaling scaling, const Observer& observer = {});

// Nearest-fluid extension into holes (multi-source BFS, 4-neighbourhood).
std::vector<double> extend(const PerforatedGrid& grid, const std::vector<double>& u);

struct ConvergenceRow {
    double eps = 0.0;
    double error = 0.0;  // ||extended u_eps - u_n|| in L2(I x Q)
    std::size_t hole_cells = 0;
    std::size_t robin_faces = 0;
};

struct ConvergenceTable {
    InitialScaling scaling = InitialScaling::Plain;
    std::vector<ConvergenceRow> rows;
    bool monotone = true;  // errors nonincreasing as eps decreases
};

// One table per requested scaling; eps values run concurrently.
std::vector<ConvergenceTable> convergence_study(const std::vector<EpsScenario>& ladder,
                                                const HomogenizedCoefficients& coeffs, const PdeParams& params,
                                                const std::vector<InitialScaling>& scalings);

// Snapshot persistence: little-endian float64 array [time][y][x] plus a JSON
// sidecar with shape, times and the params hash.
void write_snapshots(const PdeSolution& sol, const PdeParams& params, const std::string& bin_path,
                     const std::string& sidecar_path);

}  // namespace perfhom::pde
