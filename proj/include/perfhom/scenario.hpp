#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfhom/conductivity.hpp"
#include "perfhom/pde.hpp"
#include "perfhom/process.hpp"

namespace perfhom::scenario {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kOutputRootEnv = "PERFHOM_OUTPUT_ROOT";
inline constexpr const char* kCodeVersion = "perfhom 1.0.0";

struct ScenarioConfig {
    std::uint64_t seed = 0;
    std::string output = "out";

    double intensity = 1.0;
    int dim = 2;
    Box window{{0.0, 0.0, 0.0}, {20.0, 20.0, 0.0}};

    double r = 0.3;
    double r_c = 0.599;
    double resolution = 0.0;  // 0: r / 8

    std::vector<int> thinning_ladder{2, 5};

    int lattice_n = 32;
    int lattice_k_scale = 0;  // 0: default formula

    conductivity::VariationalProblem conductivity;
    bool conductivity_filled = true;

    pde::PdeParams pde;
    std::vector<double> pde_eps{0.25, 0.125, 0.0625};
    int pde_level = 5;
    std::vector<pde::InitialScaling> pde_scalings{pde::InitialScaling::Plain, pde::InitialScaling::Paper};
    pde::CoefficientOptions pde_coefficients;
    std::size_t snapshot_stride = 50;

    std::size_t stats_replicas = 200;
    Box stats_window{{0.0, 0.0, 0.0}, {20.0, 20.0, 0.0}};
    std::vector<int> stats_ladder{2, 4, 8, 16, 32};

    std::vector<std::string> studies{"sample"};

    int lattice_k() const;
};

// Schema-checked parse; unknown keys and version mismatches throw ParameterError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

struct ManifestEntry {
    std::string id;    // selector, e.g. "cloud", "thin:5", "field"
    std::string path;  // relative to the study directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct Manifest {
    std::string directory;
    std::string config_hash;
    std::vector<ManifestEntry> files;
    nlohmann::json timings = nlohmann::json::object();
    nlohmann::json summary = nlohmann::json::object();

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j, const std::string& directory);
    const ManifestEntry* find(const std::string& id) const;
};

// Resolves a relative path against $PERFHOM_OUTPUT_ROOT (if set).
std::string resolve_output(const std::string& path);

// Runs the selected studies in dependency order and writes manifest.json.
Manifest run_scenario(const ScenarioConfig& config, const std::string& config_text);

// Files whose content no longer matches the manifest (missing or changed).
std::vector<std::string> verify_manifest(const std::string& manifest_path);

// Renders the artifact named by `selector` ("cloud", "thinning", "channels")
// next to the manifest; returns the SVG path.
std::string render(const std::string& manifest_path, const std::string& selector);

}  // namespace perfhom::scenario
