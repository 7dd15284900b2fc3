#include "perfhom/conductivity.hpp"

#include <Eigen/Dense>

namespace perfhom::conductivity {

namespace {

using Direction = std::array<double, 3>;

// Q1 element data on a cube of side h, 2-point Gauss per axis.
struct Element {
    int nv = 4;
    std::vector<double> K;  // nv x nv stiffness
    std::vector<double> g;  // load: integral of eta . grad phi_a
    double eta2_volume = 0.0;

    Element(int dim, double h, const Direction& eta) : nv(1 << dim), K(nv * nv, 0.0), g(nv, 0.0) {
        const double q[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
        const double w = std::pow(h / 2.0, dim);
        const int nq = 1 << dim;
        std::vector<double> grad(static_cast<std::size_t>(nv * dim));
        for (int qi = 0; qi < nq; ++qi) {
            double t[3];
            for (int k = 0; k < dim; ++k) t[k] = q[(qi >> k) & 1];
            for (int a = 0; a < nv; ++a)
                for (int k = 0; k < dim; ++k) {
                    double v = ((a >> k) & 1) ? 1.0 / h : -1.0 / h;
                    for (int m = 0; m < dim; ++m)
                        if (m != k) v *= ((a >> m) & 1) ? t[m] : 1.0 - t[m];
                    grad[a * dim + k] = v;
                }
            for (int a = 0; a < nv; ++a) {
                for (int k = 0; k < dim; ++k) g[a] += w * eta[k] * grad[a * dim + k];
                for (int b = 0; b < nv; ++b)
                    for (int k = 0; k < dim; ++k) K[a * nv + b] += w * grad[a * dim + k] * grad[b * dim + k];
            }
        }
        double eta2 = 0.0;
        for (int k = 0; k < dim; ++k) eta2 += eta[k] * eta[k];
        eta2_volume = eta2 * std::pow(h, dim);
    }
};

struct Layout {
    int dim;
    long N;  // cells per axis
    long V;  // vertices per axis

    std::size_t vertex(long i, long j, long k) const {
        return static_cast<std::size_t>(i + V * (j + V * k));
    }
    // Global vertex of local corner a of cell c.
    std::size_t corner(std::size_t c, int a) const {
        const long i = static_cast<long>(c % N), j = static_cast<long>((c / N) % N), k = static_cast<long>(c / (N * N));
        return vertex(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
    }
    bool boundary(std::size_t v) const {
        const long i = static_cast<long>(v % V), j = static_cast<long>((v / V) % V), k = static_cast<long>(v / (V * V));
        if (i == 0 || i == V - 1 || j == 0 || j == V - 1) return true;
        return dim == 3 && (k == 0 || k == V - 1);
    }
    std::size_t vertex_count() const {
        std::size_t c = static_cast<std::size_t>(V) * static_cast<std::size_t>(V);
        return dim == 3 ? c * static_cast<std::size_t>(V) : c;
    }
};

// Kept cells with compact unknown ids of their corners (-1 when fixed at 0).
struct System {
    Layout layout;
    std::vector<std::size_t> cells;
    std::vector<long> dof;  // cells.size() * nv
    std::vector<std::size_t> dof_vertex;
    int nv;
};

System build_system(const CellMask& mask) {
    System sys{{mask.dim, mask.cells, mask.cells + 1}, {}, {}, {}, 1 << mask.dim};
    std::vector<long> id(sys.layout.vertex_count(), -1);
    for (std::size_t c = 0; c < mask.size(); ++c) {
        if (!mask.kept[c]) continue;
        sys.cells.push_back(c);
        for (int a = 0; a < sys.nv; ++a) {
            const std::size_t v = sys.layout.corner(c, a);
            if (id[v] < 0 && !sys.layout.boundary(v)) {
                id[v] = static_cast<long>(sys.dof_vertex.size());
                sys.dof_vertex.push_back(v);
            }
            sys.dof.push_back(id[v]);
        }
    }
    return sys;
}

void apply(const System& sys, const Element& el, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.setZero();
    const int nv = sys.nv;
    double local[8];
    for (std::size_t e = 0; e < sys.cells.size(); ++e) {
        const long* d = &sys.dof[e * nv];
        for (int a = 0; a < nv; ++a) local[a] = d[a] >= 0 ? x[d[a]] : 0.0;
        for (int a = 0; a < nv; ++a) {
            if (d[a] < 0) continue;
            double s = 0.0;
            for (int b = 0; b < nv; ++b) s += el.K[a * nv + b] * local[b];
            y[d[a]] += s;
        }
    }
}

Direction unit(int i) {
    Direction e{0.0, 0.0, 0.0};
    e[i] = 1.0;
    return e;
}

void require_cover(const PointCloud& cloud, const GeometryParams& geometry, const Box& box) {
    const Box need = box.inflated(geometry.r, cloud.dim());
    for (int k = 0; k < cloud.dim(); ++k)
        if (cloud.window().lo[k] > need.lo[k] + 1e-12 || cloud.window().hi[k] < need.hi[k] - 1e-12)
            throw CoverageError("cloud window does not cover the conductivity box padded by r");
}

}  // namespace

std::string to_string(DomainRule rule) {
    switch (rule) {
        case DomainRule::Strict: return "STRICT";
        case DomainRule::Center: return "CENTER";
        case DomainRule::Cover: return "COVER";
    }
    return "CENTER";
}

DomainRule parse_rule(const std::string& name) {
    if (name == "STRICT") return DomainRule::Strict;
    if (name == "CENTER") return DomainRule::Center;
    if (name == "COVER") return DomainRule::Cover;
    throw ParameterError("unknown domain rule '" + name + "' (expected STRICT, CENTER or COVER)");
}

void VariationalProblem::validate() const {
    if (dim != 2 && dim != 3) throw UnsupportedDimension("conductivity supports d = 2 or 3");
    if (n < 1 || k_scale < 1 || s < 1) throw ParameterError("conductivity needs n, k_scale, s >= 1");
    if (!(tolerance > 0.0)) throw ParameterError("CG tolerance must be > 0");
}

Point CellMask::center(std::size_t c) const {
    const long N = cells;
    const long idx[3] = {static_cast<long>(c % N), static_cast<long>((c / N) % N), static_cast<long>(c / (N * N))};
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = origin[k] + (static_cast<double>(idx[k]) + 0.5) * h;
    return p;
}

std::size_t CellMask::kept_count() const {
    return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), std::uint8_t{1}));
}

CellMask full_mask(const VariationalProblem& problem, const Point& origin) {
    problem.validate();
    CellMask m;
    m.dim = problem.dim;
    m.cells = problem.cells_per_axis();
    m.h = problem.cell_size();
    m.origin = origin;
    std::size_t total = static_cast<std::size_t>(m.cells) * static_cast<std::size_t>(m.cells);
    if (m.dim == 3) total *= static_cast<std::size_t>(m.cells);
    m.kept.assign(total, 1);
    return m;
}

CellMask strict_mask(const percolation::LatticeField& field, int s) {
    VariationalProblem p;
    p.dim = field.dim();
    p.n = field.n();
    p.k_scale = field.k_scale();
    p.s = s;
    p.rule = DomainRule::Strict;
    CellMask m = full_mask(p, field.origin());
    const long N = m.cells;
    for (std::size_t c = 0; c < m.size(); ++c) {
        const long i = static_cast<long>(c % N), j = static_cast<long>((c / N) % N), k = static_cast<long>(c / (N * N));
        m.kept[c] = field.is_open(field.index(static_cast<int>(i / s), static_cast<int>(j / s),
                                             static_cast<int>(k / s)))
                        ? 1
                        : 0;
    }
    return m;
}

Point default_origin(const PointCloud& cloud, const GeometryParams& geometry, const VariationalProblem& problem) {
    if (problem.origin) return *problem.origin;
    Point o = cloud.window().lo;
    for (int k = 0; k < cloud.dim(); ++k) o[k] += geometry.r;
    return o;
}

CellMask cloud_mask(const PointCloud& cloud, const GeometryParams& geometry, const VariationalProblem& problem) {
    geometry.validate();
    if (cloud.dim() != problem.dim) throw ParameterError("cloud and problem dimensions differ");
    if (problem.rule == DomainRule::Strict) {
        percolation::LatticeParams lp{problem.k_scale, problem.n, default_origin(cloud, geometry, problem)};
        return strict_mask(percolation::build_field(cloud, geometry, lp), problem.s);
    }
    CellMask m = full_mask(problem, default_origin(cloud, geometry, problem));
    Box box;
    for (int k = 0; k < m.dim; ++k) {
        box.lo[k] = m.origin[k];
        box.hi[k] = m.origin[k] + m.side();
    }
    require_cover(cloud, geometry, box);

    const geometry::CoverageIndex index(cloud, geometry);
    double reach = geometry.r;
    if (problem.rule == DomainRule::Cover) reach = geometry.r - 0.5 * m.h * std::sqrt(static_cast<double>(m.dim));
    if (reach < 0.0) return m;
    const double reach2 = reach * reach;
    for (std::size_t c = 0; c < m.size(); ++c)
        if (index.nearest_dist2(m.center(c), reach) <= reach2) m.kept[c] = 0;
    return m;
}

CellMask drop_islands(const CellMask& mask, const geometry::FilledRaster& filled) {
    CellMask out = mask;
    for (std::size_t c = 0; c < out.size(); ++c)
        if (out.kept[c] && filled.state_at(out.center(c)) == geometry::CellState::VacantIsland) out.kept[c] = 0;
    return out;
}

geometry::FilledRaster filled_raster_for(const PointCloud& cloud, const GeometryParams& geometry,
                                         const VariationalProblem& problem) {
    const Point o = default_origin(cloud, geometry, problem);
    Box box;
    for (int k = 0; k < problem.dim; ++k) {
        box.lo[k] = o[k];
        box.hi[k] = o[k] + problem.side();
    }
    return geometry::fill_region(cloud, geometry, problem.cell_size(), box, o);
}

EnergyResult energy(const CellMask& mask, const Direction& eta, double tolerance, long max_iterations) {
    if (mask.dim != 2 && mask.dim != 3) throw UnsupportedDimension("conductivity supports d = 2 or 3");
    double eta2 = 0.0;
    for (int k = 0; k < mask.dim; ++k) eta2 += eta[k] * eta[k];
    if (!(eta2 > 0.0)) throw ParameterError("direction eta must be nonzero");

    const Element el(mask.dim, mask.h, eta);
    const System sys = build_system(mask);
    const long m = static_cast<long>(sys.dof_vertex.size());
    const int nv = sys.nv;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(m), diag = Eigen::VectorXd::Zero(m);
    for (std::size_t e = 0; e < sys.cells.size(); ++e)
        for (int a = 0; a < nv; ++a) {
            const long d = sys.dof[e * nv + a];
            if (d < 0) continue;
            b[d] += el.g[a];
            diag[d] += el.K[a * nv + a];
        }

    if (max_iterations <= 0) max_iterations = 10 * m + 1000;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    const double bnorm = b.norm();
    double rel = 0.0;
    long it = 0;
    if (bnorm > 0.0) {
        const Eigen::VectorXd dinv = diag.cwiseInverse();
        Eigen::VectorXd r = b, z = dinv.cwiseProduct(r), p = z, Ap(m);
        double rz = r.dot(z);
        rel = 1.0;
        while (it < max_iterations) {
            apply(sys, el, p, Ap);
            const double pAp = p.dot(Ap);
            if (!(pAp > 0.0)) break;
            const double alpha = rz / pAp;
            x += alpha * p;
            r -= alpha * Ap;
            ++it;
            rel = r.norm() / bnorm;
            if (rel <= tolerance) break;
            z = dinv.cwiseProduct(r);
            const double rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
        }
        // Recompute the true residual; the recurrence drifts on long runs.
        Eigen::VectorXd Ax(m);
        apply(sys, el, x, Ax);
        rel = (b - Ax).norm() / bnorm;
        if (rel > tolerance * 10.0)
            throw SolverError("conductivity CG did not converge after " + std::to_string(it) + " iterations", rel);
    }

    EnergyResult res;
    res.corrector.v.assign(sys.layout.vertex_count(), 0.0);
    for (long d = 0; d < m; ++d) res.corrector.v[sys.dof_vertex[d]] = x[d];
    res.corrector.residual = rel;
    res.corrector.iterations = it;
    // The functional at the computed minimiser: c - 2 b.x + x.Kx.
    Eigen::VectorXd Kx(m);
    apply(sys, el, x, Kx);
    const double E = el.eta2_volume * static_cast<double>(sys.cells.size()) - 2.0 * b.dot(x) + x.dot(Kx);
    res.energy = std::max(0.0, E) / std::pow(mask.side(), mask.dim);
    return res;
}

double evaluate_energy(const CellMask& mask, const Direction& eta, const std::vector<double>& v) {
    const Element el(mask.dim, mask.h, eta);
    const Layout layout{mask.dim, mask.cells, mask.cells + 1};
    const int nv = el.nv;
    double E = 0.0;
    for (std::size_t c = 0; c < mask.size(); ++c) {
        if (!mask.kept[c]) continue;
        double local[8];
        for (int a = 0; a < nv; ++a) local[a] = v[layout.corner(c, a)];
        E += el.eta2_volume;
        for (int a = 0; a < nv; ++a) {
            E -= 2.0 * el.g[a] * local[a];
            for (int b = 0; b < nv; ++b) E += local[a] * el.K[a * nv + b] * local[b];
        }
    }
    return E / std::pow(mask.side(), mask.dim);
}

ConductivityReport effective_matrix(const CellMask& mask, const VariationalProblem& problem) {
    const int d = mask.dim;
    std::vector<Direction> dirs;
    for (int i = 0; i < d; ++i) dirs.push_back(unit(i));
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Direction e = unit(i);
            e[j] = 1.0;
            dirs.push_back(e);
        }
    std::vector<double> e(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
        e[i] = energy(mask, dirs[i], problem.tolerance, problem.max_iterations).energy;
    });

    ConductivityReport rep;
    rep.dim = d;
    rep.rule = problem.rule;
    rep.n = problem.n;
    rep.s = problem.s;
    rep.k_scale = problem.k_scale;
    rep.kept_fraction = mask.size() ? static_cast<double>(mask.kept_count()) / static_cast<double>(mask.size()) : 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) rep.energies.emplace_back(dirs[i], e[i]);
    for (int i = 0; i < d; ++i) rep.A[i][i] = e[i];
    std::size_t next = static_cast<std::size_t>(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j, ++next) {
            const double a = 0.5 * (e[next] - e[i] - e[j]);
            rep.A[i][j] = a;
            rep.A[j][i] = a;
        }
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = rep.A[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    for (int i = 0; i < d; ++i) rep.eigenvalues[i] = eig.eigenvalues()[i];
    rep.alpha = eig.eigenvalues()[0];
    return rep;
}

FilledComparison compare_filled(const PointCloud& cloud, const GeometryParams& geometry,
                                const VariationalProblem& problem) {
    problem.validate();
    const CellMask boolean = cloud_mask(cloud, geometry, problem);
    const auto raster = filled_raster_for(cloud, geometry, problem);
    const CellMask filled = drop_islands(boolean, raster);

    FilledComparison out;
    out.boolean = effective_matrix(boolean, problem);
    out.filled = effective_matrix(filled, problem);
    out.island_cells = boolean.kept_count() - filled.kept_count();
    for (int i = 0; i < problem.dim; ++i)
        for (int j = 0; j < problem.dim; ++j) out.difference[i][j] = out.filled.A[i][j] - out.boolean.A[i][j];
    return out;
}

BoundViolation::BoundViolation(const BoundRecord& rec)
    : SolverError("channel bound violated: energy " + std::to_string(rec.energy) + " < (N/n^(d-1))^2 = " +
                      std::to_string(rec.bound),
                  rec.bound - rec.energy),
      record_(rec) {}

BoundRecord channel_bound_check(const PointCloud& cloud, const GeometryParams& geometry,
                                const percolation::LatticeParams& lattice, int s, double tolerance) {
    const auto field = percolation::build_field(cloud, geometry, lattice);
    VariationalProblem p;
    p.dim = cloud.dim();
    p.n = lattice.n;
    p.k_scale = lattice.k_scale;
    p.s = s;
    p.rule = DomainRule::Cover;
    p.origin = field.origin();
    const CellMask mask = cloud_mask(cloud, geometry, p);

    BoundRecord rec;
    rec.dim = p.dim;
    rec.n = p.n;
    rec.N = percolation::count_channels(field);
    rec.energy = energy(mask, unit(0), p.tolerance).energy;
    const double ratio = static_cast<double>(rec.N) / std::pow(static_cast<double>(p.n), p.dim - 1);
    rec.bound = ratio * ratio;
    rec.holds = rec.energy >= rec.bound - tolerance;
    if (!rec.holds) throw BoundViolation(rec);
    return rec;
}

}  // namespace perfhom::conductivity
