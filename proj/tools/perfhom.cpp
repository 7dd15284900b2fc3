// perfhom command line: one-shot commands plus config-driven studies.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "perfhom/conductivity.hpp"
#include "perfhom/io.hpp"
#include "perfhom/percolation.hpp"
#include "perfhom/process.hpp"
#include "perfhom/scenario.hpp"
#include "perfhom/thinning.hpp"

using namespace perfhom;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kSolver = 3;

Box parse_window(const std::string& text, int dim) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParameterError("--window: '" + item + "' is not a number");
        }
    }
    if (static_cast<int>(v.size()) != 2 * dim)
        throw ParameterError("--window needs " + std::to_string(2 * dim) + " comma-separated numbers");
    Box b;
    for (int k = 0; k < dim; ++k) {
        b.lo[k] = v[k];
        b.hi[k] = v[dim + k];
    }
    return b;
}

std::string out_path(const std::string& p) {
    const std::string resolved = scenario::resolve_output(p);
    const fs::path parent = fs::path(resolved).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    return resolved;
}

std::string slurp(const std::string& path) { return io::read_text(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boolean-model perforations: sampling, thinning, channels, conductivity, PDE"};
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "sample a Poisson cloud in a window");
    double lambda = 1.0, r = 0.3;
    std::string window_text, out, in;
    std::uint64_t seed = 0;
    int dim = 2;
    sample->add_option("--lambda", lambda, "intensity")->required();
    sample->add_option("--r", r, "disk radius")->required();
    sample->add_option("--window", window_text, "x0,y0,x1,y1 (or x0,y0,z0,x1,y1,z1)")->required();
    sample->add_option("--seed", seed, "seed");
    sample->add_option("--dim", dim, "dimension (2 or 3)");
    sample->add_option("--out", out, "cloud JSON")->required();

    // thin
    auto* thin = app.add_subcommand("thin", "apply F_n to a cloud");
    int level = 5;
    thin->add_option("--in", in, "cloud JSON")->required();
    thin->add_option("--r", r, "disk radius")->required();
    thin->add_option("--n", level, "thinning level")->required();
    thin->add_option("--out", out, "thinned cloud JSON")->required();

    // percolate
    auto* perc = app.add_subcommand("percolate", "lattice field, channel count and crossing");
    int lattice_n = 32, k_scale = 0;
    double r_c = 0.599;
    perc->add_option("--in", in, "cloud JSON")->required();
    perc->add_option("--r", r, "disk radius")->required();
    perc->add_option("--r-c", r_c, "critical radius");
    perc->add_option("--n", lattice_n, "vertices per side");
    perc->add_option("--k-scale", k_scale, "cubes per unit length (default from r_c and r)");
    perc->add_option("--out", out, "output directory")->required();

    // conductivity
    auto* cond = app.add_subcommand("conductivity", "effective conductivity of a box");
    conductivity::VariationalProblem prob;
    std::string rule = "CENTER";
    bool filled = false;
    cond->add_option("--in", in, "cloud JSON")->required();
    cond->add_option("--r", r, "disk radius")->required();
    cond->add_option("--n", prob.n, "box side in lattice units");
    cond->add_option("--k-scale", prob.k_scale, "cubes per unit length");
    cond->add_option("--s", prob.s, "cells per lattice unit");
    cond->add_option("--rule", rule, "STRICT, CENTER or COVER");
    cond->add_flag("--filled", filled, "also solve with islands filled");
    cond->add_option("--out", out, "conductivity JSON")->required();

    // pde
    auto* pde_cmd = app.add_subcommand("pde", "perforated vs homogenized convergence (pde section of a config)");
    std::string config_path;
    pde_cmd->add_option("config", config_path, "config JSON")->required();

    // study run
    auto* study = app.add_subcommand("study", "config-driven studies");
    study->require_subcommand(1);
    auto* run = study->add_subcommand("run", "run the studies selected in a config");
    run->add_option("config", config_path, "config JSON")->required();

    // render
    auto* rend = app.add_subcommand("render", "render an artifact from a manifest to SVG");
    std::string manifest, selector;
    rend->add_option("manifest", manifest, "manifest.json")->required();
    rend->add_option("selector", selector, "cloud, thinning or channels")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "re-hash the files listed in a manifest");
    verify->add_option("manifest", manifest, "manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*sample) {
            const GeometryParams g{r};
            g.validate();
            const auto cloud = process::sample_poisson(parse_window(window_text, dim), {lambda, seed, dim});
            io::write_cloud(out_path(out), cloud);
            std::printf("%zu points\n", cloud.size());
        } else if (*thin) {
            const auto cloud = io::read_cloud(in);
            const auto t = thinning::thin(cloud, {r}, {level});
            io::write_cloud(out_path(out), t);
            std::printf("%zu of %zu points kept\n", t.size(), cloud.size());
        } else if (*perc) {
            const auto cloud = io::read_cloud(in);
            percolation::LatticeParams lp;
            lp.n = lattice_n;
            lp.k_scale = k_scale > 0 ? k_scale : percolation::LatticeParams::default_k_scale(r_c, r, cloud.dim());
            const auto field = percolation::build_field(cloud, {r}, lp);
            const auto rep = percolation::analyze(field);
            const fs::path dir = scenario::resolve_output(out);
            fs::create_directories(dir);
            if (field.dim() == 2) io::write_pbm((dir / "field.pbm").string(), field);
            io::write_text((dir / "channels.json").string(), io::channel_report_json(rep, field, 0).dump(2) + "\n");
            io::write_text((dir / "channels.csv").string(), io::channel_csv({{field.n(), rep.N, rep.L, 0}}));
            std::printf("n=%d k_scale=%d N=%lld L=%lld\n", field.n(), lp.k_scale, static_cast<long long>(rep.N),
                        static_cast<long long>(rep.L));
        } else if (*cond) {
            const auto cloud = io::read_cloud(in);
            prob.dim = cloud.dim();
            prob.rule = conductivity::parse_rule(rule);
            prob.validate();
            const GeometryParams g{r};
            nlohmann::json j;
            if (filled) {
                const auto cmp = conductivity::compare_filled(cloud, g, prob);
                j = io::conductivity_json(cmp.boolean);
                j["filled"] = io::conductivity_json(cmp.filled);
                j["island_cells"] = cmp.island_cells;
            } else {
                j = io::conductivity_json(conductivity::effective_matrix(conductivity::cloud_mask(cloud, g, prob), prob));
            }
            io::write_text(out_path(out), j.dump(2) + "\n");
            std::printf("alpha=%.6f\n", j["alpha"].get<double>());
        } else if (*pde_cmd || *run) {
            const std::string text = slurp(config_path);
            auto config = scenario::parse_config(io::read_json(config_path));
            if (*pde_cmd) config.studies = {"pde"};
            const auto m = scenario::run_scenario(config, text);
            std::printf("%zu files in %s\n", m.files.size(), m.directory.c_str());
            if (m.summary.contains("convergence_monotone"))
                for (auto it = m.summary["convergence_monotone"].begin(); it != m.summary["convergence_monotone"].end();
                     ++it)
                    std::printf("convergence %s monotone=%s\n", it.key().c_str(), it.value().get<bool>() ? "yes" : "no");
        } else if (*rend) {
            std::printf("%s\n", scenario::render(manifest, selector).c_str());
        } else if (*verify) {
            const auto bad = scenario::verify_manifest(manifest);
            for (const auto& b : bad) std::printf("%s\n", b.c_str());
            if (!bad.empty()) return kValidation;
            std::printf("ok\n");
        }
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s (residual %.3g)\n", e.what(), e.residual());
        return kSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kOk;
}
