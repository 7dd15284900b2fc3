#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perfhom/conductivity.hpp"
#include "perfhom/core.hpp"
#include "perfhom/geometry.hpp"
#include "perfhom/percolation.hpp"
#include "perfhom/stats.hpp"

namespace perfhom::io {

using nlohmann::json;

// {"dim":2,"window":[[x0,y0],[x1,y1]],"points":[[x,y],...]}
json cloud_to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const json& j);
PointCloud read_cloud(const std::string& path);
void write_cloud(const std::string& path, const PointCloud& cloud);

json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Binary PGM (P5, maxval 2) of a 2D filled raster, one byte per cell holding
// the cell state; the first row written is the top row (largest y).
void write_pgm(const std::string& path, const geometry::FilledRaster& raster);
// Plain PBM (P1) of a 2D lattice field, 1 = blocked; top row first.
void write_pbm(const std::string& path, const percolation::LatticeField& field);
percolation::LatticeField read_pbm(const std::string& path);

json channel_report_json(const percolation::ChannelReport& report, const percolation::LatticeField& field,
                         std::uint64_t seed);
// Header "n,N,L,seed" plus one row per entry.
std::string channel_csv(const std::vector<std::array<long long, 4>>& rows);

json conductivity_json(const conductivity::ConductivityReport& report);
json estimator_json(const stats::EstimatorReport& report);

// Drawing layers for one panel.
struct SvgScene {
    const PointCloud* cloud = nullptr;
    double r = 0.0;
    const geometry::FilledRaster* raster = nullptr;  // islands shaded
    const percolation::LatticeField* field = nullptr;
    const std::vector<std::vector<std::size_t>>* channels = nullptr;
    std::string title;
};

// Side-by-side panels sharing one scale.
std::string render_svg(const std::vector<SvgScene>& panels);

}  // namespace perfhom::io
