#include "perfhom/scenario.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <mutex>
#include <set>

#include "perfhom/geometry.hpp"
#include "perfhom/io.hpp"
#include "perfhom/percolation.hpp"
#include "perfhom/stats.hpp"
#include "perfhom/thinning.hpp"

namespace perfhom::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kStudyOrder{"sample", "thin", "percolate", "conductivity", "pde", "stats", "render"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ParameterError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ParameterError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParameterError(where + "." + key + " has the wrong type");
    }
}

Box parse_box(const json& j, int dim, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() ||
        static_cast<int>(j[0].size()) != dim || static_cast<int>(j[1].size()) != dim)
        throw ParameterError(where + " must be [[lo...],[hi...]] with " + std::to_string(dim) + " coordinates");
    Box b;
    for (int k = 0; k < dim; ++k) {
        b.lo[k] = j[0][k].get<double>();
        b.hi[k] = j[1][k].get<double>();
        if (!(b.hi[k] > b.lo[k])) throw ParameterError(where + " must have positive extent");
    }
    return b;
}

pde::ClosedForm parse_form(const json& j, const std::string& where) {
    check_keys(j, {"kind", "p"}, where);
    pde::ClosedForm f;
    get(j, "kind", f.kind, where);
    f.p.clear();
    get(j, "p", f.p, where);
    return f;
}

std::string iso_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return Rng::mix64(seed ^ Rng::mix64(tag)); }

// Collects emitted files and their hashes.
class Writer {
  public:
    explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void text(const std::string& id, const std::string& name, const std::string& content) {
        io::write_text((dir_ / name).string(), content);
        add(id, name);
    }
    void add(const std::string& id, const std::string& name) {
        const std::string data = io::read_text((dir_ / name).string());
        std::lock_guard lock(mutex_);
        files_.push_back({id, name, sha256_hex(data), data.size()});
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    const fs::path& dir() const { return dir_; }
    // Sorted by path so concurrent studies still give a stable manifest.
    std::vector<ManifestEntry> files() const {
        auto f = files_;
        std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
        return f;
    }

  private:
    fs::path dir_;
    std::vector<ManifestEntry> files_;
    std::mutex mutex_;
};

percolation::LatticeParams lattice_for(const ScenarioConfig& c) {
    percolation::LatticeParams lp;
    lp.k_scale = c.lattice_k();
    lp.n = c.lattice_n;
    return lp;
}

std::string render_cloud_svg(const PointCloud& cloud, double r, double resolution) {
    const GeometryParams g{r};
    const auto raster = geometry::fill(cloud, g, resolution > 0 ? resolution : geometry::default_resolution(g));
    io::SvgScene s;
    s.cloud = &cloud;
    s.r = r;
    s.raster = cloud.dim() == 2 ? &raster : nullptr;
    s.title = "Boolean model (islands shaded)";
    return io::render_svg({s});
}

std::string render_thinning_svg(const std::vector<std::pair<int, PointCloud>>& clouds, double r) {
    std::vector<io::SvgScene> panels;
    for (const auto& [n, cloud] : clouds) {
        io::SvgScene s;
        s.cloud = &cloud;
        s.r = r;
        s.title = n == 0 ? "x" : "x^(" + std::to_string(n) + ")";
        panels.push_back(s);
    }
    return io::render_svg(panels);
}

std::string render_channels_svg(const PointCloud& cloud, double r, const percolation::LatticeField& field,
                                const std::vector<std::vector<std::size_t>>& channels) {
    io::SvgScene s;
    s.cloud = &cloud;
    s.r = r;
    s.field = &field;
    s.channels = &channels;
    s.title = "blocked cubes and channel witnesses";
    return io::render_svg({s});
}

percolation::LatticeField field_from_channels(const json& ch, const percolation::LatticeField& bits) {
    Point origin{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < ch["origin"].size(); ++k) origin[k] = ch["origin"][k].get<double>();
    return percolation::LatticeField(2, bits.n(), bits.open(), origin, ch["k_scale"].get<int>());
}

std::vector<std::vector<std::size_t>> channels_from_json(const json& ch, const percolation::LatticeField& field) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& path : ch["channels"]) {
        std::vector<std::size_t> p;
        for (const auto& z : path) p.push_back(field.index(z[0].get<int>(), z[1].get<int>()));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

int ScenarioConfig::lattice_k() const {
    return lattice_k_scale > 0 ? lattice_k_scale : percolation::LatticeParams::default_k_scale(r_c, r, dim);
}

ScenarioConfig parse_config(const json& j) {
    check_keys(j, {"version", "seed", "output", "studies", "process", "geometry", "thinning", "lattice",
                   "conductivity", "pde", "stats"},
               "config");
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kConfigVersion)
        throw ParameterError("config version must be " + std::to_string(kConfigVersion));
    ScenarioConfig c;
    get(j, "seed", c.seed, "config");
    get(j, "output", c.output, "config");
    get(j, "studies", c.studies, "config");
    for (const auto& s : c.studies)
        if (std::find(kStudyOrder.begin(), kStudyOrder.end(), s) == kStudyOrder.end())
            throw ParameterError("unknown study '" + s + "'");

    if (j.contains("process")) {
        const json& p = j["process"];
        check_keys(p, {"intensity", "dim", "window"}, "process");
        get(p, "intensity", c.intensity, "process");
        get(p, "dim", c.dim, "process");
        if (c.dim != 2 && c.dim != 3) throw UnsupportedDimension("process.dim must be 2 or 3");
        if (p.contains("window")) c.window = parse_box(p["window"], c.dim, "process.window");
    }
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        check_keys(g, {"r", "r_c", "resolution"}, "geometry");
        get(g, "r", c.r, "geometry");
        get(g, "r_c", c.r_c, "geometry");
        get(g, "resolution", c.resolution, "geometry");
    }
    if (j.contains("thinning")) {
        check_keys(j["thinning"], {"ladder"}, "thinning");
        get(j["thinning"], "ladder", c.thinning_ladder, "thinning");
    }
    if (j.contains("lattice")) {
        check_keys(j["lattice"], {"n", "k_scale"}, "lattice");
        get(j["lattice"], "n", c.lattice_n, "lattice");
        get(j["lattice"], "k_scale", c.lattice_k_scale, "lattice");
    }
    c.conductivity.dim = c.dim;
    if (j.contains("conductivity")) {
        const json& k = j["conductivity"];
        check_keys(k, {"n", "k_scale", "s", "rule", "filled", "tolerance"}, "conductivity");
        get(k, "n", c.conductivity.n, "conductivity");
        get(k, "k_scale", c.conductivity.k_scale, "conductivity");
        get(k, "s", c.conductivity.s, "conductivity");
        get(k, "filled", c.conductivity_filled, "conductivity");
        get(k, "tolerance", c.conductivity.tolerance, "conductivity");
        std::string rule = "CENTER";
        get(k, "rule", rule, "conductivity");
        c.conductivity.rule = conductivity::parse_rule(rule);
    }
    if (j.contains("pde")) {
        const json& p = j["pde"];
        check_keys(p, {"Q", "T", "dt", "N_g", "u0", "f", "A", "A_min", "A_max", "h", "L_h", "picard_sweeps",
                       "picard_bound", "eps", "level", "initial_scaling", "snapshot_stride", "coefficients"},
                   "pde");
        if (p.contains("Q")) {
            std::vector<double> q;
            get(p, "Q", q, "pde");
            if (q.size() != 4) throw ParameterError("pde.Q must be [x0, y0, x1, y1]");
            c.pde.Q = {q[0], q[1], q[2], q[3]};
        }
        get(p, "T", c.pde.T, "pde");
        get(p, "dt", c.pde.dt, "pde");
        get(p, "N_g", c.pde.cells_per_unit, "pde");
        if (p.contains("u0")) c.pde.u0 = parse_form(p["u0"], "pde.u0");
        if (p.contains("f")) c.pde.f = parse_form(p["f"], "pde.f");
        if (p.contains("A")) c.pde.A = parse_form(p["A"], "pde.A");
        if (p.contains("h")) c.pde.h = parse_form(p["h"], "pde.h");
        get(p, "A_min", c.pde.A_min, "pde");
        get(p, "A_max", c.pde.A_max, "pde");
        get(p, "L_h", c.pde.L_h, "pde");
        get(p, "picard_sweeps", c.pde.picard_sweeps, "pde");
        get(p, "picard_bound", c.pde.picard_bound, "pde");
        get(p, "eps", c.pde_eps, "pde");
        get(p, "level", c.pde_level, "pde");
        get(p, "snapshot_stride", c.snapshot_stride, "pde");
        if (p.contains("initial_scaling")) {
            std::vector<std::string> names;
            get(p, "initial_scaling", names, "pde");
            c.pde_scalings.clear();
            for (const auto& n : names) c.pde_scalings.push_back(pde::parse_initial_scaling(n));
        }
        if (p.contains("coefficients")) {
            const json& q = p["coefficients"];
            check_keys(q, {"stats_replicas", "box_n", "box_s", "box_replicas"}, "pde.coefficients");
            get(q, "stats_replicas", c.pde_coefficients.stats_replicas, "pde.coefficients");
            get(q, "box_n", c.pde_coefficients.box_n, "pde.coefficients");
            get(q, "box_s", c.pde_coefficients.box_s, "pde.coefficients");
            get(q, "box_replicas", c.pde_coefficients.box_replicas, "pde.coefficients");
        }
        c.pde.validate();
        if (c.snapshot_stride < 1) throw ParameterError("pde.snapshot_stride must be >= 1");
    }
    if (j.contains("stats")) {
        const json& s = j["stats"];
        check_keys(s, {"replicas", "window", "ladder"}, "stats");
        get(s, "replicas", c.stats_replicas, "stats");
        get(s, "ladder", c.stats_ladder, "stats");
        if (s.contains("window")) c.stats_window = parse_box(s["window"], 2, "stats.window");
    }

    GeometryParams{c.r}.validate();
    process::ProcessParams{c.intensity, c.seed, c.dim}.validate();
    for (int n : c.thinning_ladder) thinning::ThinningLevel{n}.validate();
    for (int n : c.stats_ladder) thinning::ThinningLevel{n}.validate();
    c.conductivity.validate();
    if (c.lattice_n < 1) throw ParameterError("lattice.n must be >= 1");
    if (c.lattice_k_scale < 0) throw ParameterError("lattice.k_scale must be >= 1");
    return c;
}

ScenarioConfig load_config(const std::string& path) { return parse_config(io::read_json(path)); }

json Manifest::to_json() const {
    json files_json = json::array();
    for (const auto& f : files)
        files_json.push_back({{"id", f.id}, {"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"version", kConfigVersion}, {"code_version", kCodeVersion}, {"config_hash", config_hash},
            {"files", files_json},       {"timings", timings},           {"summary", summary}};
}

Manifest Manifest::from_json(const json& j, const std::string& directory) {
    Manifest m;
    m.directory = directory;
    try {
        m.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& f : j.at("files"))
            m.files.push_back({f.at("id").get<std::string>(), f.at("path").get<std::string>(),
                               f.at("sha256").get<std::string>(), f.at("bytes").get<std::size_t>()});
        if (j.contains("timings")) m.timings = j["timings"];
        if (j.contains("summary")) m.summary = j["summary"];
    } catch (const json::exception& e) {
        throw ParameterError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

const ManifestEntry* Manifest::find(const std::string& id) const {
    for (const auto& f : files)
        if (f.id == id) return &f;
    return nullptr;
}

std::string resolve_output(const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return p.string();
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return (fs::path(root) / p).string();
    return p.string();
}

Manifest run_scenario(const ScenarioConfig& c, const std::string& config_text) {
    auto selected = [&](const std::string& s) {
        return std::find(c.studies.begin(), c.studies.end(), s) != c.studies.end();
    };
    for (const char* s : {"thin", "percolate", "conductivity", "render"})
        if (selected(s) && !selected("sample"))
            throw ParameterError(std::string("study '") + s + "' needs the 'sample' study upstream");

    Writer out(resolve_output(c.output));
    Manifest m;
    m.directory = out.dir().string();
    m.config_hash = sha256_hex(config_text);
    const GeometryParams geometry{c.r};
    const double resolution = c.resolution > 0 ? c.resolution : geometry::default_resolution(geometry);
    auto clock = [] { return std::chrono::steady_clock::now(); };
    auto seconds = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };

    auto run_pde = [&](json& sm, json& tm) {
        const auto t0 = clock();
        const thinning::ThinningLevel level{c.pde_level};
        const process::ProcessParams pp{c.intensity, derive_seed(c.seed, 1), 2};
        const auto est = pde::estimate_coefficients(pp, geometry, level, c.pde_coefficients);
        json coeffs{{"C1", est.coeffs.C1},
                    {"C1_se", est.C1_se},
                    {"C2", est.coeffs.C2},
                    {"C2_se", est.C2_se},
                    {"A", est.coeffs.A},
                    {"A_se", est.A_se}};
        out.text("coefficients", "coefficients.json", coeffs.dump(2) + "\n");

        double eps_min = 1.0;
        for (double e : c.pde_eps) eps_min = std::min(eps_min, e);
        const double pad = 2.0 * c.r + 2.0 * c.pde_level * c.r;
        Box w;
        w.lo = {c.pde.Q.x0 / eps_min - pad, c.pde.Q.y0 / eps_min - pad, 0.0};
        w.hi = {c.pde.Q.x1 / eps_min + pad, c.pde.Q.y1 / eps_min + pad, 0.0};
        const PointCloud pde_cloud = process::sample_poisson(w, {c.intensity, derive_seed(c.seed, 2), 2});
        std::vector<pde::EpsScenario> ladder;
        for (double e : c.pde_eps) ladder.push_back({e, pde_cloud, geometry, level, true});
        const auto tables = pde::convergence_study(ladder, est.coeffs, c.pde, c.pde_scalings);
        for (const auto& tab : tables) {
            std::string csv = "eps,error,hole_cells,robin_faces\n";
            for (const auto& row : tab.rows) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%zu\n", row.eps, row.error, row.hole_cells,
                              row.robin_faces);
                csv += buf;
            }
            const std::string tag = pde::to_string(tab.scaling);
            out.text("convergence:" + tag, "convergence_" + tag + ".csv", csv);
            sm["convergence_monotone"][tag] = tab.monotone;
        }
        pde::PdeParams sp = c.pde;
        sp.keep_snapshots = true;
        auto sol = pde::solve_homogenized(est.coeffs, sp, c.pde_scalings.front());
        pde::PdeSolution thin_sol = sol;
        thin_sol.snapshots.clear();
        thin_sol.times.clear();
        for (std::size_t k = 0; k < sol.snapshots.size(); k += c.snapshot_stride) {
            thin_sol.snapshots.push_back(sol.snapshots[k]);
            thin_sol.times.push_back(sol.times[k]);
        }
        if ((sol.snapshots.size() - 1) % c.snapshot_stride != 0) {
            thin_sol.snapshots.push_back(sol.snapshots.back());
            thin_sol.times.push_back(sol.times.back());
        }
        pde::write_snapshots(thin_sol, sp, out.path("homogenized.bin"), out.path("homogenized.json"));
        out.add("snapshots", "homogenized.bin");
        out.add("snapshots_sidecar", "homogenized.json");
        std::string diag = "t,l2_norm,energy,mass,cg_iterations\n";
        for (const auto& d : sol.diagnostics) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", d.t, d.l2_norm, d.energy, d.mass,
                          d.cg_iterations);
            diag += buf;
        }
        out.text("diagnostics", "homogenized_diagnostics.csv", diag);
        tm["pde"] = iso_seconds(seconds(t0, clock()));
    };
    auto run_stats = [&](json& sm, json& tm) {
        const auto t0 = clock();
        const process::ProcessParams pp{c.intensity, derive_seed(c.seed, 3), 2};
        const stats::StudyWindow sw{c.stats_window, c.stats_replicas};
        const auto ladder = stats::intensity_ladder(pp, geometry, c.stats_ladder, sw);
        std::string csv = "n,estimate,se,replicas\n";
        auto row = [&](int n, const stats::EstimatorReport& r) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%zu\n", n, r.estimate, r.se, r.replicas);
            csv += buf;
        };
        row(0, ladder.unthinned.report);
        for (const auto& r : ladder.rows) row(r.n, r.report);
        out.text("intensity", "intensity.csv", csv);
        json summary;
        summary["subset_violations"] = ladder.subset_violations;
        summary["vacancy_boolean"] = io::estimator_json(stats::estimate_vacancy(pp, geometry, std::nullopt, false, sw));
        summary["vacancy_filled"] = io::estimator_json(stats::estimate_vacancy(pp, geometry, std::nullopt, true, sw));
        const auto surf = stats::estimate_surface_intensity(pp, geometry, std::nullopt, sw);
        summary["surface_intensity"] = io::estimator_json(surf.report);
        summary["surface_intensity"]["boundary_arcs"] = surf.boundary_arcs;
        summary["surface_intensity"]["island_arcs"] = surf.island_arcs;
        out.text("stats", "stats.json", summary.dump(2) + "\n");
        sm["subset_violations"] = ladder.subset_violations;
        tm["stats"] = iso_seconds(seconds(t0, clock()));
    };

    // pde and stats draw their own realizations, so they run beside the cloud chain.
    json pde_summary, pde_timings, stats_summary, stats_timings;
    std::future<void> pde_job, stats_job;
    if (selected("pde")) pde_job = std::async(std::launch::async, run_pde, std::ref(pde_summary), std::ref(pde_timings));
    if (selected("stats"))
        stats_job = std::async(std::launch::async, run_stats, std::ref(stats_summary), std::ref(stats_timings));

    PointCloud cloud;
    std::vector<std::pair<int, PointCloud>> thinned;
    std::optional<percolation::LatticeField> field;
    percolation::ChannelReport channels;

    if (selected("sample")) {
        const auto t0 = clock();
        cloud = process::sample_poisson(c.window, {c.intensity, c.seed, c.dim});
        io::write_cloud(out.path("cloud.json"), cloud);
        out.add("cloud", "cloud.json");
        if (c.dim == 2) {
            io::write_pgm(out.path("filled.pgm"), geometry::fill(cloud, geometry, resolution));
            out.add("filled", "filled.pgm");
        }
        m.summary["points"] = cloud.size();
        m.timings["sample"] = iso_seconds(seconds(t0, clock()));
    }
    if (selected("thin")) {
        const auto t0 = clock();
        for (int n : c.thinning_ladder) {
            PointCloud t = thinning::thin(cloud, geometry, {n});
            const std::string name = "thin_" + std::to_string(n) + ".json";
            io::write_cloud(out.path(name), t);
            out.add("thin:" + std::to_string(n), name);
            m.summary["thin"][std::to_string(n)] = t.size();
            thinned.emplace_back(n, std::move(t));
        }
        m.timings["thin"] = iso_seconds(seconds(t0, clock()));
    }
    if (selected("percolate")) {
        const auto t0 = clock();
        field = percolation::build_field(cloud, geometry, lattice_for(c));
        channels = percolation::analyze(*field);
        if (!percolation::verify_channels(*field, channels.channels))
            throw SolverError("channel witnesses failed verification");
        if (field->dim() == 2) {
            io::write_pbm(out.path("field.pbm"), *field);
            out.add("field", "field.pbm");
        }
        out.text("channels", "channels.json", io::channel_report_json(channels, *field, c.seed).dump(2) + "\n");
        out.text("channels_csv", "channels.csv",
                 io::channel_csv({{field->n(), channels.N, channels.L, static_cast<long long>(c.seed)}}));
        m.summary["N"] = channels.N;
        m.summary["L"] = channels.L;
        m.timings["percolate"] = iso_seconds(seconds(t0, clock()));
    }
    if (selected("conductivity")) {
        const auto t0 = clock();
        conductivity::VariationalProblem prob = c.conductivity;
        prob.dim = c.dim;
        json j;
        if (c.conductivity_filled) {
            const auto cmp = conductivity::compare_filled(cloud, geometry, prob);
            auto b = cmp.boolean, f = cmp.filled;
            b.seed = f.seed = c.seed;
            out.text("conductivity", "conductivity.json", io::conductivity_json(b).dump(2) + "\n");
            out.text("conductivity_filled", "conductivity_filled.json", io::conductivity_json(f).dump(2) + "\n");
            m.summary["alpha"] = b.alpha;
            m.summary["alpha_filled"] = f.alpha;
        } else {
            const auto mask = conductivity::cloud_mask(cloud, geometry, prob);
            auto rep = conductivity::effective_matrix(mask, prob);
            rep.seed = c.seed;
            out.text("conductivity", "conductivity.json", io::conductivity_json(rep).dump(2) + "\n");
            m.summary["alpha"] = rep.alpha;
        }
        m.timings["conductivity"] = iso_seconds(seconds(t0, clock()));
    }
    if (selected("render")) {
        const auto t0 = clock();
        if (cloud.dim() == 2) {
            out.text("svg:cloud", "cloud.svg", render_cloud_svg(cloud, c.r, resolution));
            if (!thinned.empty()) {
                std::vector<std::pair<int, PointCloud>> panels{{0, cloud}};
                for (const auto& t : thinned) panels.push_back(t);
                out.text("svg:thinning", "thinning.svg", render_thinning_svg(panels, c.r));
            }
            if (field && field->dim() == 2)
                out.text("svg:channels", "channels.svg", render_channels_svg(cloud, c.r, *field, channels.channels));
        }
        m.timings["render"] = iso_seconds(seconds(t0, clock()));
    }

    for (auto* job : {&pde_job, &stats_job})
        if (job->valid()) job->get();
    for (const json* part : {&pde_summary, &stats_summary})
        if (part->is_object()) m.summary.update(*part);
    for (const json* part : {&pde_timings, &stats_timings})
        if (part->is_object()) m.timings.update(*part);

    m.summary["r"] = c.r;
    m.summary["resolution"] = resolution;
    m.files = out.files();
    io::write_text(out.path("manifest.json"), m.to_json().dump(2) + "\n");
    return m;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
    const fs::path dir = fs::path(manifest_path).parent_path();
    const Manifest m = Manifest::from_json(io::read_json(manifest_path), dir.string());
    std::vector<std::string> bad;
    for (const auto& f : m.files) {
        const fs::path p = dir / f.path;
        if (!fs::exists(p)) {
            bad.push_back(f.path + ": missing");
            continue;
        }
        if (sha256_hex(io::read_text(p.string())) != f.sha256) bad.push_back(f.path + ": content changed");
    }
    return bad;
}

std::string render(const std::string& manifest_path, const std::string& selector) {
    const fs::path dir = fs::path(manifest_path).parent_path();
    const Manifest m = Manifest::from_json(io::read_json(manifest_path), dir.string());
    const double r = m.summary.value("r", 0.3);
    const double resolution = m.summary.value("resolution", 0.0);
    auto need = [&](const std::string& id) {
        const ManifestEntry* e = m.find(id);
        if (!e) throw ParameterError("manifest has no artifact '" + id + "'");
        return (dir / e->path).string();
    };
    std::string svg;
    if (selector == "cloud") {
        svg = render_cloud_svg(io::read_cloud(need("cloud")), r, resolution);
    } else if (selector == "thinning") {
        std::vector<std::pair<int, PointCloud>> panels{{0, io::read_cloud(need("cloud"))}};
        for (const auto& f : m.files)
            if (f.id.rfind("thin:", 0) == 0)
                panels.emplace_back(std::stoi(f.id.substr(5)), io::read_cloud((dir / f.path).string()));
        if (panels.size() == 1) throw ParameterError("manifest has no thinning artifacts");
        svg = render_thinning_svg(panels, r);
    } else if (selector == "channels") {
        const json ch = io::read_json(need("channels"));
        const auto field = field_from_channels(ch, io::read_pbm(need("field")));
        svg = render_channels_svg(io::read_cloud(need("cloud")), r, field, channels_from_json(ch, field));
    } else {
        throw ParameterError("unknown render selector '" + selector + "' (cloud, thinning, channels)");
    }
    const std::string path = (dir / ("render_" + selector + ".svg")).string();
    io::write_text(path, svg);
    return path;
}

}  // namespace perfhom::scenario
