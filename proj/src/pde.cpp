#include "perfhom/pde.hpp"

#include <cstdio>
#include <deque>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "perfhom/conductivity.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/stats.hpp"

namespace perfhom::pde {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Conductance between two unknowns: weight * harmonic mean of A.
struct Link {
    std::size_t a, b;
    double w;
};

// Discrete problem on the unknowns (fluid cells, or all cells).
struct Operator {
    int nx = 0, ny = 0;
    double h = 0.0;
    std::vector<std::size_t> cell_of;  // unknown -> grid cell
    std::vector<Point> centers;
    std::vector<double> mass;          // mass weight * cell area
    std::vector<Link> links;
    std::vector<std::pair<std::size_t, double>> reaction;  // unknown, weight on h(u)

    std::size_t size() const { return cell_of.size(); }
};

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

class Stepper {
  public:
    Stepper(const Operator& op, const PdeParams& params) : op_(op), params_(params) {}

    // Advances u from t to t + dt. Returns (CG iterations, Picard sweeps).
    std::pair<int, int> step(std::vector<double>& u, double t, double dt) const {
        const std::size_t n = op_.size();
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Point& c = op_.centers[i];
            rhs[i] = op_.mass[i] * (u[i] / dt + params_.f(t, c[0], c[1]));
        }
        for (const auto& [i, w] : op_.reaction) rhs[i] += w * params_.h.of_u(u[i]);

        std::vector<double> frozen = u, next = u;
        int iterations = 0, sweeps = 0;
        for (;;) {
            std::vector<double> coeff(op_.links.size());
            for (std::size_t l = 0; l < op_.links.size(); ++l) {
                const auto& L = op_.links[l];
                coeff[l] = L.w * harmonic(params_.conductivity(frozen[L.a]), params_.conductivity(frozen[L.b]));
            }
            iterations += solve(coeff, dt, rhs, next);
            if (sweeps >= params_.picard_sweeps) break;
            ++sweeps;
            double diff = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                diff += (next[i] - frozen[i]) * (next[i] - frozen[i]);
                norm += next[i] * next[i];
            }
            const double rel = std::sqrt(diff / std::max(norm, 1e-300));
            frozen = next;
            if (rel <= params_.picard_bound) break;
            if (sweeps == params_.picard_sweeps)
                throw SolverError("time step rejected: Picard residual " + fmt(rel) + " above bound", rel);
        }
        u = std::move(next);
        return {iterations, sweeps};
    }

    StepDiagnostics diagnose(const std::vector<double>& u, double t) const {
        StepDiagnostics d;
        d.t = t;
        const double area = op_.h * op_.h;
        for (std::size_t i = 0; i < op_.size(); ++i) {
            d.l2_norm += u[i] * u[i] * area;
            d.mass += op_.mass[i] * u[i];
        }
        d.l2_norm = std::sqrt(d.l2_norm);
        for (const auto& L : op_.links) d.energy += L.w * (u[L.a] - u[L.b]) * (u[L.a] - u[L.b]);
        return d;
    }

  private:
    void multiply(const std::vector<double>& coeff, double dt, const std::vector<double>& x,
                  std::vector<double>& y) const {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = op_.mass[i] / dt * x[i];
        for (std::size_t l = 0; l < op_.links.size(); ++l) {
            const auto& L = op_.links[l];
            const double flux = coeff[l] * (x[L.a] - x[L.b]);
            y[L.a] += flux;
            y[L.b] -= flux;
        }
    }

    int solve(const std::vector<double>& coeff, double dt, const std::vector<double>& b, std::vector<double>& x) const {
        const std::size_t n = b.size();
        std::vector<double> diag(n), r(n), z(n), p(n), Ap(n);
        for (std::size_t i = 0; i < n; ++i) diag[i] = op_.mass[i] / dt;
        for (std::size_t l = 0; l < op_.links.size(); ++l) {
            diag[op_.links[l].a] += coeff[l];
            diag[op_.links[l].b] += coeff[l];
        }
        auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
            return s;
        };
        const double bnorm = std::sqrt(dot(b, b));
        multiply(coeff, dt, x, Ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
        const long max_it = 10 * static_cast<long>(n) + 1000;
        long it = 0;
        double rel = bnorm > 0.0 ? std::sqrt(dot(r, r)) / bnorm : 0.0;
        if (rel > params_.cg_tolerance) {
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
            p = z;
            double rz = dot(r, z);
            while (it < max_it) {
                multiply(coeff, dt, p, Ap);
                const double alpha = rz / dot(p, Ap);
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * Ap[i];
                }
                ++it;
                rel = std::sqrt(dot(r, r)) / bnorm;
                if (rel <= params_.cg_tolerance) break;
                for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
                const double rz_new = dot(r, z);
                const double beta = rz_new / rz;
                rz = rz_new;
                for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
            }
            if (rel > params_.cg_tolerance) throw SolverError("time-step CG did not converge", rel);
        }
        // The flux part annihilates constants, so shifting x by a constant
        // removes the mean residual and makes mass balance exact.
        multiply(coeff, dt, x, Ap);
        double rsum = 0.0, msum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rsum += b[i] - Ap[i];
            msum += op_.mass[i] / dt;
        }
        if (msum > 0.0)
            for (std::size_t i = 0; i < n; ++i) x[i] += rsum / msum;
        return static_cast<int>(it);
    }

    const Operator& op_;
    const PdeParams& params_;
};

PdeSolution run(const Operator& op, const PdeParams& params, std::vector<double> u, const Observer& observer) {
    const Stepper stepper(op, params);
    PdeSolution sol;
    sol.nx = op.nx;
    sol.ny = op.ny;
    const std::size_t cells = static_cast<std::size_t>(op.nx) * static_cast<std::size_t>(op.ny);
    std::vector<double> grid(cells, std::numeric_limits<double>::quiet_NaN());
    auto record = [&](std::size_t k, double t, const StepDiagnostics& d) {
        for (std::size_t i = 0; i < op.size(); ++i) grid[op.cell_of[i]] = u[i];
        sol.times.push_back(t);
        sol.diagnostics.push_back(d);
        if (params.keep_snapshots) sol.snapshots.push_back(grid);
        if (observer) observer(k, t, grid);
    };

    const std::size_t steps = params.step_count();
    double t = 0.0;
    record(0, t, stepper.diagnose(u, t));
    for (std::size_t k = 1; k <= steps; ++k) {
        const double dt = k == steps ? params.T - t : params.dt;
        const auto [iters, sweeps] = stepper.step(u, t, dt);
        t = k == steps ? params.T : t + dt;
        StepDiagnostics d = stepper.diagnose(u, t);
        d.cg_iterations = iters;
        d.picard_sweeps = sweeps;
        sol.grad_l2l2 += dt * d.energy;
        record(k, t, d);
    }
    return sol;
}

void grid_shape(const PdeParams& params, int& nx, int& ny) {
    const double fx = params.Q.width() * params.cells_per_unit;
    const double fy = params.Q.height() * params.cells_per_unit;
    nx = static_cast<int>(std::lround(fx));
    ny = static_cast<int>(std::lround(fy));
    if (nx < 1 || ny < 1 || std::abs(fx - nx) > 1e-9 * std::max(1.0, fx) || std::abs(fy - ny) > 1e-9 * std::max(1.0, fy))
        throw ParameterError("Q side lengths times N_g must be whole numbers of cells");
}

double dist_to_complement(const Point& p, const Rect& q) {
    if (p[0] <= q.x0 || p[0] >= q.x1 || p[1] <= q.y0 || p[1] >= q.y1) return 0.0;
    return std::min({p[0] - q.x0, q.x1 - p[0], p[1] - q.y0, q.y1 - p[1]});
}

}  // namespace

double ClosedForm::operator()(double t, double x, double y) const {
    auto at = [&](std::size_t i) { return i < p.size() ? p[i] : 0.0; };
    if (kind == "constant") return at(0);
    if (kind == "cos") return at(0) + at(1) * std::cos(kPi * at(2) * x) * std::cos(kPi * at(3) * y);
    if (kind == "manufactured_u") return std::exp(-t) * std::cos(kPi * x);
    if (kind == "manufactured_f") return (kPi * kPi - 1.0) * std::exp(-t) * std::cos(kPi * x);
    throw ParameterError("'" + kind + "' is not a space-time closed form");
}

double ClosedForm::of_u(double u) const {
    auto at = [&](std::size_t i) { return i < p.size() ? p[i] : 0.0; };
    if (kind == "constant") return at(0);
    if (kind == "affine") return at(0) + at(1) * u;
    if (kind == "logistic") return at(0) * u * (1.0 - u);
    throw ParameterError("'" + kind + "' is not a closed form in u");
}

std::string ClosedForm::describe() const {
    std::string s = kind + "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + fmt(p[i]);
    return s + ")";
}

void PdeParams::validate() const {
    if (!(Q.width() > 0.0) || !(Q.height() > 0.0)) throw ParameterError("Q must have positive side lengths");
    if (!(T > 0.0)) throw ParameterError("final time T must be > 0");
    if (!(dt > 0.0)) throw ParameterError("time step must be > 0");
    if (cells_per_unit < 1) throw ParameterError("N_g must be >= 1");
    if (!(A_min > 0.0) || !(A_max >= A_min) || !std::isfinite(A_max))
        throw ParameterError("conductivity bounds need 0 < A_min <= A_max < inf");
    if (!(L_h >= 0.0) || !std::isfinite(L_h)) throw ParameterError("Lipschitz constant of h must be finite");
    if (picard_sweeps < 0 || picard_sweeps > 5) throw ParameterError("Picard sweeps must be in [0, 5]");
    if (!(cg_tolerance > 0.0)) throw ParameterError("CG tolerance must be > 0");
    // Evaluate once so unknown kinds fail early.
    (void)u0(0.0, Q.x0, Q.y0);
    (void)f(0.0, Q.x0, Q.y0);
    (void)A.of_u(0.0);
    (void)h.of_u(0.0);
}

double PdeParams::conductivity(double u) const { return std::clamp(A.of_u(u), A_min, A_max); }

std::size_t PdeParams::step_count() const {
    const double k = T / dt;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) <= 1e-9 * std::max(1.0, k)) return static_cast<std::size_t>(rounded);
    return static_cast<std::size_t>(std::ceil(k));
}

std::string PdeParams::hash() const {
    std::string s = "Q=" + fmt(Q.x0) + "," + fmt(Q.y0) + "," + fmt(Q.x1) + "," + fmt(Q.y1);
    s += ";T=" + fmt(T) + ";dt=" + fmt(dt) + ";Ng=" + std::to_string(cells_per_unit);
    s += ";u0=" + u0.describe() + ";f=" + f.describe() + ";A=" + A.describe();
    s += ";A_min=" + fmt(A_min) + ";A_max=" + fmt(A_max) + ";h=" + h.describe() + ";L_h=" + fmt(L_h);
    s += ";picard=" + std::to_string(picard_sweeps) + "," + fmt(picard_bound) + ";cg=" + fmt(cg_tolerance);
    return sha256_hex(s);
}

Point PerforatedGrid::center(std::size_t c) const {
    const auto i = static_cast<double>(c % static_cast<std::size_t>(nx));
    const auto j = static_cast<double>(c / static_cast<std::size_t>(nx));
    return {Q.x0 + (i + 0.5) * h, Q.y0 + (j + 0.5) * h, 0.0};
}

std::size_t PerforatedGrid::fluid_count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), CellKind::Fluid));
}

namespace {

void build_faces(PerforatedGrid& g) {
    g.faces.clear();
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t a = g.index(i, j);
            if (g.cells[a] != CellKind::Fluid) continue;
            for (int d = 0; d < 4; ++d) {
                const int ii = i + di[d], jj = j + dj[d];
                if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) {
                    g.faces.push_back({a, a, FaceKind::OuterNeumann, g.h});
                    continue;
                }
                const std::size_t b = g.index(ii, jj);
                if (g.cells[b] == CellKind::Hole)
                    g.faces.push_back({a, b, FaceKind::HoleRobin, g.h});
                else if (b > a)
                    g.faces.push_back({a, b, FaceKind::Interior, g.h});
            }
        }
}

}  // namespace

PerforatedGrid plain_grid(const PdeParams& params) {
    params.validate();
    PerforatedGrid g;
    g.Q = params.Q;
    grid_shape(params, g.nx, g.ny);
    g.h = 1.0 / params.cells_per_unit;
    g.cells.assign(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny), CellKind::Fluid);
    build_faces(g);
    return g;
}


PerforatedGrid build_perforated_grid(const EpsScenario& scenario, const PdeParams& params) {
    PerforatedGrid g = plain_grid(params);
    const double eps = scenario.eps;
    if (!(eps > 0.0) || eps > 1.0) throw ParameterError("eps must be in (0, 1]");
    scenario.geometry.validate();
    if (scenario.cloud.dim() != 2) throw UnsupportedDimension("perforated PDE grids are planar");
    const double r = scenario.geometry.r;
    const int n = scenario.apply_thinning ? scenario.level.n : 0;
    if (scenario.apply_thinning) {
        scenario.level.validate();
        if (!(eps * 2.0 * n * r < std::min(params.Q.width(), params.Q.height())))
            throw ParameterError("eps * 2nr must be below the smallest side of Q");
    }

    // Unscaled copy of Q.
    Rect q{params.Q.x0 / eps, params.Q.y0 / eps, params.Q.x1 / eps, params.Q.y1 / eps};
    Box region;
    region.lo = {q.x0, q.y0, 0.0};
    region.hi = {q.x1, q.y1, 0.0};
    const Box need = region.inflated(2.0 * r + 2.0 * n * r, 2);
    const Box& w = scenario.cloud.window();
    for (int k = 0; k < 2; ++k)
        if (w.lo[k] > need.lo[k] + 1e-9 || w.hi[k] < need.hi[k] - 1e-9)
            throw CoverageError("cloud window does not cover Q / eps padded by 2r + 2nr");

    const PointCloud cloud =
        scenario.apply_thinning ? thinning::thin(scenario.cloud, scenario.geometry, scenario.level) : scenario.cloud;
    const auto cs = geometry::clusters(cloud, scenario.geometry);
    std::vector<std::size_t> keep;
    for (const auto& members : cs.clusters) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i : members) dmin = std::min(dmin, dist_to_complement(cloud[i], q));
        if (dmin > 2.0 * r)
            for (std::size_t i : members) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());
    const PointCloud kept = cloud.subset(keep);
    if (!kept.empty()) {
        const auto raster = geometry::fill_region(kept, scenario.geometry, g.h / eps, region, region.lo);
        for (std::size_t c = 0; c < g.cells.size(); ++c) {
            const Point p = g.center(c);
            if (raster.in_filled({p[0] / eps, p[1] / eps, 0.0})) g.cells[c] = CellKind::Hole;
        }
    }
    build_faces(g);
    return g;
}

void HomogenizedCoefficients::validate() const {
    if (!(C1 > 0.0) || C1 > 1.0) throw ParameterError("C1 must lie in (0, 1]");
    if (!(C2 >= 0.0)) throw ParameterError("C2 must be >= 0");
    if (std::abs(A[0][1] - A[1][0]) > 1e-12 * (std::abs(A[0][1]) + 1.0)) throw ParameterError("A must be symmetric");
    const double off = std::abs(A[0][1]);
    if (!(A[0][0] - off >= 0.0) || !(A[1][1] - off >= 0.0) || !(A[0][0] + A[1][1] > 0.0))
        throw ParameterError("the scheme needs a positive, diagonally dominant effective matrix");
}

CoefficientEstimate estimate_coefficients(const process::ProcessParams& process, const GeometryParams& geometry,
                                          std::optional<thinning::ThinningLevel> level,
                                          const CoefficientOptions& options) {
    if (process.dim != 2) throw UnsupportedDimension("homogenized coefficients are estimated in 2D");
    const stats::StudyWindow study{options.stats_window, options.stats_replicas};
    const auto vac = stats::estimate_vacancy(process, geometry, level, true, study);
    const auto surf = stats::estimate_surface_intensity(process, geometry, level, study);

    conductivity::VariationalProblem prob;
    prob.n = options.box_n;
    prob.s = options.box_s;
    prob.rule = conductivity::DomainRule::Center;
    const double margin = stats::thinning_margin(geometry, level) + geometry.r;
    Box window;
    window.lo = {-margin, -margin, 0.0};
    window.hi = {prob.side() + margin, prob.side() + margin, 0.0};
    prob.origin = Point{0.0, 0.0, 0.0};
    std::vector<std::array<std::array<double, 3>, 3>> As(options.box_replicas);
    const Rng master = Rng(process.seed).substream(0x636f6e64ULL);
    for (std::size_t i = 0; i < options.box_replicas; ++i) {
        Rng rng = master.substream(i);
        PointCloud cloud = process::sample_poisson(window, process, rng);
        if (level) cloud = thinning::thin(cloud, geometry, *level);
        const auto mask = conductivity::drop_islands(conductivity::cloud_mask(cloud, geometry, prob),
                                                     conductivity::filled_raster_for(cloud, geometry, prob));
        As[i] = conductivity::effective_matrix(mask, prob).A;
    }

    CoefficientEstimate out;
    out.coeffs.C1 = vac.estimate;
    out.C1_se = vac.se;
    out.coeffs.C2 = surf.report.estimate;
    out.C2_se = surf.report.se;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            std::vector<double> v;
            for (const auto& A : As) v.push_back(A[a][b]);
            const auto rep = stats::summarize(v, window, margin);
            out.coeffs.A[a][b] = rep.estimate;
            out.A_se[a][b] = rep.se;
        }
    const double sym = 0.5 * (out.coeffs.A[0][1] + out.coeffs.A[1][0]);
    out.coeffs.A[0][1] = out.coeffs.A[1][0] = sym;
    return out;
}

std::string to_string(InitialScaling s) { return s == InitialScaling::Paper ? "PAPER" : "PLAIN"; }

InitialScaling parse_initial_scaling(const std::string& name) {
    if (name == "PAPER") return InitialScaling::Paper;
    if (name == "PLAIN") return InitialScaling::Plain;
    throw ParameterError("initial_scaling must be PAPER or PLAIN");
}

PdeSolution solve_eps(const PerforatedGrid& grid, const PdeParams& params, double eps, const Observer& observer) {
    params.validate();
    Operator op;
    op.nx = grid.nx;
    op.ny = grid.ny;
    op.h = grid.h;
    std::vector<std::size_t> unknown(grid.cells.size(), 0);
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        if (grid.cells[c] != CellKind::Fluid) continue;
        unknown[c] = op.cell_of.size();
        op.cell_of.push_back(c);
        op.centers.push_back(grid.center(c));
        op.mass.push_back(grid.h * grid.h);
    }
    for (const Face& f : grid.faces) {
        if (f.kind == FaceKind::Interior) op.links.push_back({unknown[f.a], unknown[f.b], f.area / grid.h});
        else if (f.kind == FaceKind::HoleRobin) op.reaction.emplace_back(unknown[f.a], eps * f.area);
    }
    std::vector<double> u(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) u[i] = params.u0(0.0, op.centers[i][0], op.centers[i][1]);
    return run(op, params, std::move(u), observer);
}

PdeSolution solve_homogenized(const HomogenizedCoefficients& coeffs, const PdeParams& params, InitialScaling scaling,
                              const Observer& observer) {
    params.validate();
    coeffs.validate();
    const PerforatedGrid grid = plain_grid(params);
    Operator op;
    op.nx = grid.nx;
    op.ny = grid.ny;
    op.h = grid.h;
    const double area = grid.h * grid.h;
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        op.cell_of.push_back(c);
        op.centers.push_back(grid.center(c));
        op.mass.push_back(coeffs.C1 * area);
        if (coeffs.C2 > 0.0) op.reaction.emplace_back(c, coeffs.C2 * area);
    }
    // Split A into a 5-point part diag(a11 - |a12|, a22 - |a12|) and the
    // diagonal second difference |a12| (d_x + s d_y)^2, s = sign(a12).
    const double off = std::abs(coeffs.A[0][1]);
    const int sgn = coeffs.A[0][1] >= 0.0 ? 1 : -1;
    const double ax = coeffs.A[0][0] - off, ay = coeffs.A[1][1] - off;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t a = grid.index(i, j);
            if (i + 1 < grid.nx && ax > 0.0) op.links.push_back({a, grid.index(i + 1, j), ax});
            if (j + 1 < grid.ny && ay > 0.0) op.links.push_back({a, grid.index(i, j + 1), ay});
            if (off > 0.0) {
                const int ii = i + 1, jj = j + sgn;
                if (ii < grid.nx && jj >= 0 && jj < grid.ny) op.links.push_back({a, grid.index(ii, jj), off});
            }
        }
    const double scale = scaling == InitialScaling::Paper ? coeffs.C1 : 1.0;
    std::vector<double> u(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) u[i] = scale * params.u0(0.0, op.centers[i][0], op.centers[i][1]);
    return run(op, params, std::move(u), observer);
}

std::vector<double> extend(const PerforatedGrid& grid, const std::vector<double>& u) {
    std::vector<double> out = u;
    std::vector<bool> done(grid.cells.size(), false);
    std::deque<std::size_t> queue;
    for (std::size_t c = 0; c < grid.cells.size(); ++c)
        if (grid.cells[c] == CellKind::Fluid) {
            done[c] = true;
            queue.push_back(c);
        }
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const std::size_t c = queue.front();
        queue.pop_front();
        const int i = static_cast<int>(c % static_cast<std::size_t>(grid.nx));
        const int j = static_cast<int>(c / static_cast<std::size_t>(grid.nx));
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d], jj = j + dj[d];
            if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
            const std::size_t b = grid.index(ii, jj);
            if (done[b]) continue;
            done[b] = true;
            out[b] = out[c];
            queue.push_back(b);
        }
    }
    return out;
}

std::vector<ConvergenceTable> convergence_study(const std::vector<EpsScenario>& ladder,
                                                const HomogenizedCoefficients& coeffs, const PdeParams& params,
                                                const std::vector<InitialScaling>& scalings) {
    PdeParams hp = params;
    hp.keep_snapshots = true;
    std::vector<PdeSolution> limits;
    for (InitialScaling s : scalings) limits.push_back(solve_homogenized(coeffs, hp, s));

    const double area = 1.0 / (static_cast<double>(params.cells_per_unit) * params.cells_per_unit);
    std::vector<std::vector<double>> sq(ladder.size(), std::vector<double>(scalings.size(), 0.0));
    std::vector<ConvergenceRow> rows(ladder.size());
    PdeParams ep = params;
    ep.keep_snapshots = false;
    parallel_for(ladder.size(), [&](std::size_t e) {
        const PerforatedGrid grid = build_perforated_grid(ladder[e], params);
        rows[e].eps = ladder[e].eps;
        rows[e].hole_cells = grid.cells.size() - grid.fluid_count();
        for (const Face& f : grid.faces) rows[e].robin_faces += f.kind == FaceKind::HoleRobin;
        double prev_t = 0.0;
        std::vector<double> prev(scalings.size(), 0.0);
        solve_eps(grid, ep, ladder[e].eps, [&](std::size_t k, double t, const std::vector<double>& u) {
            const std::vector<double> ext = extend(grid, u);
            for (std::size_t s = 0; s < scalings.size(); ++s) {
                const auto& ref = limits[s].snapshots[k];
                double acc = 0.0;
                for (std::size_t c = 0; c < ext.size(); ++c) acc += (ext[c] - ref[c]) * (ext[c] - ref[c]) * area;
                // Trapezoid rule in time.
                if (k > 0) sq[e][s] += 0.5 * (t - prev_t) * (acc + prev[s]);
                prev[s] = acc;
            }
            prev_t = t;
        });
    });

    std::vector<ConvergenceTable> tables;
    for (std::size_t s = 0; s < scalings.size(); ++s) {
        ConvergenceTable tab;
        tab.scaling = scalings[s];
        for (std::size_t e = 0; e < ladder.size(); ++e) {
            ConvergenceRow row = rows[e];
            row.error = std::sqrt(sq[e][s]);
            tab.rows.push_back(row);
        }
        std::vector<ConvergenceRow> sorted = tab.rows;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i].error > sorted[i - 1].error) tab.monotone = false;
        tables.push_back(tab);
    }
    return tables;
}

void write_snapshots(const PdeSolution& sol, const PdeParams& params, const std::string& bin_path,
                     const std::string& sidecar_path) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw ParameterError("cannot write " + bin_path);
    for (const auto& snap : sol.snapshots)
        bin.write(reinterpret_cast<const char*>(snap.data()), static_cast<std::streamsize>(snap.size() * sizeof(double)));
    nlohmann::json j;
    j["dtype"] = "float64-le";
    j["layout"] = "time, y, x";
    j["shape"] = {sol.snapshots.size(), sol.ny, sol.nx};
    j["times"] = sol.times;
    j["params_hash"] = params.hash();
    j["Q"] = {params.Q.x0, params.Q.y0, params.Q.x1, params.Q.y1};
    j["T"] = params.T;
    j["dt"] = params.dt;
    j["N_g"] = params.cells_per_unit;
    std::ofstream side(sidecar_path);
    if (!side) throw ParameterError("cannot write " + sidecar_path);
    side << j.dump(2) << "\n";
}

}  // namespace perfhom::pde
