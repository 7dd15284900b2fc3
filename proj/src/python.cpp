#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "perfhom/conductivity.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/io.hpp"
#include "perfhom/pde.hpp"
#include "perfhom/percolation.hpp"
#include "perfhom/process.hpp"
#include "perfhom/scenario.hpp"
#include "perfhom/stats.hpp"
#include "perfhom/thinning.hpp"

namespace py = pybind11;
using namespace perfhom;

namespace {

using Corner = std::vector<double>;

Box make_box(const Corner& lo, const Corner& hi) {
    if (lo.size() != hi.size() || lo.size() < 2 || lo.size() > 3)
        throw ParameterError("window corners need 2 or 3 matching coordinates");
    Box b;
    for (std::size_t k = 0; k < lo.size(); ++k) {
        b.lo[k] = lo[k];
        b.hi[k] = hi[k];
    }
    return b;
}

py::array_t<double> points_array(const PointCloud& c) {
    const auto dim = static_cast<py::ssize_t>(c.dim());
    py::array_t<double> out({static_cast<py::ssize_t>(c.size()), dim});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < c.size(); ++i)
        for (py::ssize_t k = 0; k < dim; ++k) v(static_cast<py::ssize_t>(i), k) = c[i][static_cast<std::size_t>(k)];
    return out;
}

PointCloud make_cloud(py::array_t<double, py::array::c_style | py::array::forcecast> pts, const Corner& lo,
                      const Corner& hi) {
    const Box w = make_box(lo, hi);
    const int dim = static_cast<int>(lo.size());
    if (pts.size() == 0) return PointCloud(dim, w, {});
    if (pts.ndim() != 2 || pts.shape(1) != dim) throw ParameterError("points must be an (m, dim) array");
    auto v = pts.unchecked<2>();
    std::vector<Point> p(static_cast<std::size_t>(pts.shape(0)));
    for (py::ssize_t i = 0; i < pts.shape(0); ++i)
        for (int k = 0; k < dim; ++k) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = v(i, k);
    return PointCloud(dim, w, std::move(p));
}

Corner corner(const Point& p, int dim) { return Corner(p.begin(), p.begin() + dim); }

// Rows are y, columns x; 1 = open.
percolation::LatticeField field_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ParameterError("field must be a square 2D array");
    const int n = static_cast<int>(a.shape(0));
    std::vector<std::uint8_t> open(a.data(), a.data() + a.size());
    for (auto& o : open) o = o ? 1 : 0;
    return percolation::LatticeField(2, n, std::move(open));
}

py::array_t<std::uint8_t> field_array(const percolation::LatticeField& f) {
    if (f.dim() != 2) throw UnsupportedDimension("only 2D fields convert to arrays");
    py::array_t<std::uint8_t> out({f.n(), f.n()});
    std::copy(f.open().begin(), f.open().end(), out.mutable_data());
    return out;
}

py::dict channel_dict(const percolation::LatticeField& f, const percolation::ChannelReport& rep) {
    auto coords = [&](const std::vector<std::size_t>& path) {
        py::list l;
        for (std::size_t v : path) {
            const auto z = f.coords(v);
            l.append(py::make_tuple(z[0], z[1]));
        }
        return l;
    };
    py::list ch;
    for (const auto& c : rep.channels) ch.append(coords(c));
    py::dict d;
    d["N"] = rep.N;
    d["L"] = rep.L;
    d["channels"] = ch;
    d["crossing"] = coords(rep.crossing);
    return d;
}

py::dict estimator_dict(const stats::EstimatorReport& r) {
    py::dict d;
    d["estimate"] = r.estimate;
    d["se"] = r.se;
    d["replicas"] = r.replicas;
    d["margin"] = r.margin;
    return d;
}

pde::ClosedForm closed_form(const py::object& o) {
    if (py::isinstance<py::float_>(o) || py::isinstance<py::int_>(o)) return pde::ClosedForm::constant(o.cast<double>());
    const auto t = o.cast<std::pair<std::string, std::vector<double>>>();
    return {t.first, t.second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Boolean-model percolation, thinning, conductivity and homogenization";

    auto param = py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<CoverageError>(m, "CoverageError", param.ptr());
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init(&make_cloud), py::arg("points"), py::arg("lo"), py::arg("hi"))
        .def_property_readonly("points", &points_array)
        .def_property_readonly("dim", &PointCloud::dim)
        .def_property_readonly("lo", [](const PointCloud& c) { return corner(c.window().lo, c.dim()); })
        .def_property_readonly("hi", [](const PointCloud& c) { return corner(c.window().hi, c.dim()); })
        .def("__len__", &PointCloud::size)
        .def("__eq__", [](const PointCloud& a, const PointCloud& b) { return a == b; })
        .def("to_json", [](const PointCloud& c) { return io::cloud_to_json(c).dump(); })
        .def_static("from_json", [](const std::string& s) { return io::cloud_from_json(nlohmann::json::parse(s)); });

    m.def(
        "sample_poisson",
        [](double intensity, const Corner& lo, const Corner& hi, std::uint64_t seed) {
            return process::sample_poisson(make_box(lo, hi), {intensity, seed, static_cast<int>(lo.size())});
        },
        py::arg("intensity"), py::arg("lo"), py::arg("hi"), py::arg("seed") = 0);

    m.def(
        "clusters",
        [](const PointCloud& c, double r) { return geometry::clusters(c, {r}).clusters; }, py::arg("cloud"),
        py::arg("r"));

    m.def(
        "thin", [](const PointCloud& c, double r, int n) { return thinning::thin(c, {r}, {n}); }, py::arg("cloud"),
        py::arg("r"), py::arg("n"));

    m.def(
        "delta_hat",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> pts, double r) {
            const auto c = make_cloud(pts, {-1e300, -1e300}, {1e300, 1e300});
            return geometry::delta_hat(c.points(), 2, {r}).value;
        },
        py::arg("points"), py::arg("r"));

    m.def("count_channels", [](py::array_t<std::uint8_t> a) { return percolation::count_channels(field_from_array(a)); },
          py::arg("field"));

    m.def(
        "analyze_field",
        [](py::array_t<std::uint8_t> a) {
            const auto f = field_from_array(a);
            return channel_dict(f, percolation::analyze(f));
        },
        py::arg("field"));

    m.def(
        "percolate",
        [](const PointCloud& c, double r, int n, int k_scale) {
            const auto f = percolation::build_field(c, {r}, {k_scale, n, std::nullopt});
            py::dict d = channel_dict(f, percolation::analyze(f));
            d["field"] = field_array(f);
            return d;
        },
        py::arg("cloud"), py::arg("r"), py::arg("n"), py::arg("k_scale"));

    m.def("default_k_scale", &percolation::LatticeParams::default_k_scale, py::arg("r_c"), py::arg("r"),
          py::arg("dim") = 2);

    m.def(
        "effective_conductivity",
        [](const PointCloud& c, double r, int n, int k_scale, int s, const std::string& rule, bool filled) {
            conductivity::VariationalProblem p;
            p.dim = c.dim();
            p.n = n;
            p.k_scale = k_scale;
            p.s = s;
            p.rule = conductivity::parse_rule(rule);
            auto mask = conductivity::cloud_mask(c, {r}, p);
            if (filled) mask = conductivity::drop_islands(mask, conductivity::filled_raster_for(c, {r}, p));
            const auto rep = conductivity::effective_matrix(mask, p);
            py::list A;
            for (int i = 0; i < rep.dim; ++i) {
                py::list row;
                for (int j = 0; j < rep.dim; ++j) row.append(rep.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                A.append(row);
            }
            py::dict d;
            d["A"] = A;
            d["alpha"] = rep.alpha;
            d["kept_fraction"] = rep.kept_fraction;
            return d;
        },
        py::arg("cloud"), py::arg("r"), py::arg("n"), py::arg("k_scale") = 1, py::arg("s") = 4,
        py::arg("rule") = "CENTER", py::arg("filled") = false);

    m.def(
        "intensity_ladder",
        [](double intensity, std::uint64_t seed, double r, const std::vector<int>& levels, const Corner& lo,
           const Corner& hi, std::size_t replicas) {
            const auto lad = stats::intensity_ladder({intensity, seed, static_cast<int>(lo.size())}, {r}, levels,
                                                     {make_box(lo, hi), replicas});
            py::dict rows;
            for (const auto& row : lad.rows) rows[py::int_(row.n)] = estimator_dict(row.report);
            py::dict d;
            d["unthinned"] = estimator_dict(lad.unthinned.report);
            d["levels"] = rows;
            d["subset_violations"] = lad.subset_violations;
            return d;
        },
        py::arg("intensity"), py::arg("seed"), py::arg("r"), py::arg("levels"), py::arg("lo"), py::arg("hi"),
        py::arg("replicas") = 200);

    m.def(
        "vacancy",
        [](double intensity, std::uint64_t seed, double r, const Corner& lo, const Corner& hi, std::size_t replicas,
           bool filled) {
            return estimator_dict(stats::estimate_vacancy({intensity, seed, 2}, {r}, std::nullopt, filled,
                                                          {make_box(lo, hi), replicas}));
        },
        py::arg("intensity"), py::arg("seed"), py::arg("r"), py::arg("lo"), py::arg("hi"), py::arg("replicas") = 200,
        py::arg("filled") = false);

    m.def(
        "solve_homogenized",
        [](double C1, double C2, const std::array<std::array<double, 2>, 2>& A, double T, double dt, int N_g,
           const py::object& u0, const py::object& f, const py::object& h, const std::string& scaling) {
            pde::PdeParams p;
            p.T = T;
            p.dt = dt;
            p.cells_per_unit = N_g;
            p.u0 = closed_form(u0);
            p.f = closed_form(f);
            p.h = closed_form(h);
            pde::HomogenizedCoefficients hc{C1, C2, A};
            const auto sol = pde::solve_homogenized(hc, p, pde::parse_initial_scaling(scaling));
            py::array_t<double> u({static_cast<py::ssize_t>(sol.snapshots.size()), static_cast<py::ssize_t>(sol.ny),
                                   static_cast<py::ssize_t>(sol.nx)});
            double* out = u.mutable_data();
            for (const auto& s : sol.snapshots) out = std::copy(s.begin(), s.end(), out);
            py::list mass;
            for (const auto& d : sol.diagnostics) mass.append(d.mass);
            py::dict d;
            d["times"] = sol.times;
            d["u"] = u;
            d["mass"] = mass;
            return d;
        },
        py::arg("C1") = 1.0, py::arg("C2") = 0.0,
        py::arg("A") = std::array<std::array<double, 2>, 2>{{{1.0, 0.0}, {0.0, 1.0}}}, py::arg("T") = 0.5,
        py::arg("dt") = 1e-3, py::arg("N_g") = 128, py::arg("u0") = 0.0, py::arg("f") = 0.0, py::arg("h") = 0.0,
        py::arg("scaling") = "PLAIN");

    m.def(
        "run_scenario",
        [](const std::string& config_text) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(config_text);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParameterError(std::string("config: ") + e.what());
            }
            py::gil_scoped_release release;
            return scenario::run_scenario(scenario::parse_config(j), config_text).to_json().dump();
        },
        py::arg("config_text"));

    m.def("verify_manifest", &scenario::verify_manifest, py::arg("manifest_path"));
    m.def("render", &scenario::render, py::arg("manifest_path"), py::arg("selector"));
    m.attr("code_version") = scenario::kCodeVersion;
}
