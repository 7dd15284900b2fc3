#include "perfhom/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace perfhom::io {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) throw ParameterError(what + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ParameterError("unknown key '" + it.key() + "' in " + what);
    }
}

Point point_from(const json& j, int dim, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ParameterError(what + " must have " + std::to_string(dim) + " coordinates");
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
        if (!j[k].is_number()) throw ParameterError(what + " coordinates must be numbers");
        p[k] = j[k].get<double>();
    }
    return p;
}

json point_to(const Point& p, int dim) {
    json a = json::array();
    for (int k = 0; k < dim; ++k) a.push_back(p[k]);
    return a;
}

}  // namespace

json cloud_to_json(const PointCloud& cloud) {
    const int dim = cloud.dim();
    json j;
    j["dim"] = dim;
    j["window"] = {point_to(cloud.window().lo, dim), point_to(cloud.window().hi, dim)};
    json pts = json::array();
    for (const auto& p : cloud.points()) pts.push_back(point_to(p, dim));
    j["points"] = std::move(pts);
    return j;
}

PointCloud cloud_from_json(const json& j) {
    require_keys(j, {"dim", "window", "points"}, "point cloud");
    if (!j.contains("dim") || !j.contains("window") || !j.contains("points"))
        throw ParameterError("point cloud needs dim, window and points");
    const int dim = j["dim"].get<int>();
    if (dim != 2 && dim != 3) throw UnsupportedDimension("point cloud dimension must be 2 or 3");
    const json& w = j["window"];
    if (!w.is_array() || w.size() != 2) throw ParameterError("window must be [[lo...],[hi...]]");
    Box box;
    box.lo = point_from(w[0], dim, "window corner");
    box.hi = point_from(w[1], dim, "window corner");
    std::vector<Point> pts;
    if (!j["points"].is_array()) throw ParameterError("points must be an array");
    for (const auto& p : j["points"]) pts.push_back(point_from(p, dim, "point"));
    return PointCloud(dim, box, std::move(pts));
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParameterError(path + ": " + e.what());
    }
}

PointCloud read_cloud(const std::string& path) { return cloud_from_json(read_json(path)); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
    write_text(path, cloud_to_json(cloud).dump() + "\n");
}

void write_pgm(const std::string& path, const geometry::FilledRaster& raster) {
    const auto& f = raster.frame();
    if (f.dim != 2) throw UnsupportedDimension("PGM export needs a 2D raster");
    std::string out = "P5\n" + std::to_string(f.shape[0]) + " " + std::to_string(f.shape[1]) + "\n2\n";
    for (long j = f.shape[1] - 1; j >= 0; --j)
        for (long i = 0; i < f.shape[0]; ++i) out.push_back(static_cast<char>(raster.state(f.index(i, j))));
    write_text(path, out);
}

void write_pbm(const std::string& path, const percolation::LatticeField& field) {
    if (field.dim() != 2) throw UnsupportedDimension("PBM export needs a 2D field");
    const int n = field.n();
    std::string out = "P1\n" + std::to_string(n) + " " + std::to_string(n) + "\n";
    for (int j = n - 1; j >= 0; --j) {
        for (int i = 0; i < n; ++i) {
            if (i) out.push_back(' ');
            out.push_back(field.is_open(field.index(i, j)) ? '0' : '1');
        }
        out.push_back('\n');
    }
    write_text(path, out);
}

percolation::LatticeField read_pbm(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string magic;
    int w = 0, h = 0;
    in >> magic >> w >> h;
    if (magic != "P1" || w != h || w < 1) throw ParameterError(path + ": expected a square plain PBM");
    std::vector<std::uint8_t> open(static_cast<std::size_t>(w) * static_cast<std::size_t>(w), 1);
    for (int j = w - 1; j >= 0; --j)
        for (int i = 0; i < w; ++i) {
            int bit = 0;
            if (!(in >> bit) || (bit != 0 && bit != 1)) throw ParameterError(path + ": truncated PBM");
            open[static_cast<std::size_t>(i + w * j)] = bit ? 0 : 1;
        }
    return percolation::LatticeField(2, w, std::move(open));
}

json channel_report_json(const percolation::ChannelReport& report, const percolation::LatticeField& field,
                         std::uint64_t seed) {
    auto coords = [&](const std::vector<std::size_t>& path) {
        json a = json::array();
        for (std::size_t v : path) {
            const auto z = field.coords(v);
            if (field.dim() == 2) a.push_back({z[0], z[1]});
            else a.push_back({z[0], z[1], z[2]});
        }
        return a;
    };
    json j;
    j["n"] = field.n();
    j["dim"] = field.dim();
    j["k_scale"] = field.k_scale();
    j["origin"] = point_to(field.origin(), field.dim());
    j["N"] = report.N;
    if (report.L >= 0) j["L"] = report.L;
    else j["L"] = nullptr;
    j["seed"] = seed;
    json ch = json::array();
    for (const auto& c : report.channels) ch.push_back(coords(c));
    j["channels"] = std::move(ch);
    j["crossing"] = coords(report.crossing);
    return j;
}

std::string channel_csv(const std::vector<std::array<long long, 4>>& rows) {
    std::string out = "n,N,L,seed\n";
    for (const auto& r : rows)
        out += std::to_string(r[0]) + "," + std::to_string(r[1]) + "," + std::to_string(r[2]) + "," +
               std::to_string(r[3]) + "\n";
    return out;
}

json conductivity_json(const conductivity::ConductivityReport& report) {
    json A = json::array();
    for (int i = 0; i < report.dim; ++i) {
        json row = json::array();
        for (int j = 0; j < report.dim; ++j) row.push_back(report.A[i][j]);
        A.push_back(row);
    }
    json energies = json::array();
    for (const auto& [eta, e] : report.energies) energies.push_back({{"eta", point_to(eta, report.dim)}, {"e", e}});
    json j;
    j["A"] = A;
    j["alpha"] = report.alpha;
    j["rule"] = conductivity::to_string(report.rule);
    j["n"] = report.n;
    j["s"] = report.s;
    j["k_scale"] = report.k_scale;
    j["seed"] = report.seed;
    j["kept_fraction"] = report.kept_fraction;
    j["energies"] = energies;
    return j;
}

json estimator_json(const stats::EstimatorReport& report) {
    json j;
    j["estimate"] = report.estimate;
    j["se"] = report.se;
    j["replicas"] = report.replicas;
    j["window"] = {point_to(report.window.lo, 2), point_to(report.window.hi, 2)};
    j["margin"] = report.margin;
    return j;
}

std::string render_svg(const std::vector<SvgScene>& panels) {
    const double panel_px = 400.0, pad = 20.0, title_px = 24.0;
    const double width = pad + panels.size() * (panel_px + pad);
    const double height = 2 * pad + title_px + panel_px;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const SvgScene& s = panels[p];
        Box extent;
        if (s.cloud) extent = s.cloud->window();
        else if (s.field) extent = s.field->box();
        else extent.hi = {1.0, 1.0, 0.0};
        const double sx = extent.side(0) > 0 ? extent.side(0) : 1.0;
        const double sy = extent.side(1) > 0 ? extent.side(1) : 1.0;
        const double scale = panel_px / std::max(sx, sy);
        const double x0 = pad + p * (panel_px + pad), y0 = pad + title_px;
        auto X = [&](double x) { return num(x0 + (x - extent.lo[0]) * scale); };
        auto Y = [&](double y) { return num(y0 + (extent.hi[1] - y) * scale); };

        svg << "<g id=\"panel" << p << "\">\n";
        svg << "<text x=\"" << num(x0) << "\" y=\"" << num(pad + 16) << "\" font-family=\"sans-serif\" font-size=\"14\">"
            << s.title << "</text>\n";
        svg << "<clipPath id=\"clip" << p << "\"><rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
            << num(sx * scale) << "\" height=\"" << num(sy * scale) << "\"/></clipPath>\n";
        svg << "<g clip-path=\"url(#clip" << p << ")\">\n";

        if (s.field && s.field->dim() == 2) {
            svg << "<g id=\"lattice\" fill=\"#888\" fill-opacity=\"0.35\">\n";
            for (std::size_t v = 0; v < s.field->size(); ++v) {
                if (s.field->is_open(v)) continue;
                const Box c = s.field->cube(v);
                svg << "<rect x=\"" << X(c.lo[0]) << "\" y=\"" << Y(c.hi[1]) << "\" width=\"" << num(c.side(0) * scale)
                    << "\" height=\"" << num(c.side(1) * scale) << "\"/>\n";
            }
            svg << "</g>\n";
        }
        if (s.cloud && s.cloud->dim() == 2) {
            svg << "<g id=\"disks\" fill=\"#3b6ea5\" fill-opacity=\"0.55\" stroke=\"#1d3f66\" stroke-width=\"0.5\">\n";
            for (const auto& q : s.cloud->points())
                svg << "<circle cx=\"" << X(q[0]) << "\" cy=\"" << Y(q[1]) << "\" r=\"" << num(s.r * scale) << "\"/>\n";
            svg << "</g>\n";
        }
        if (s.raster && s.raster->frame().dim == 2) {
            const auto& f = s.raster->frame();
            svg << "<g id=\"islands\" fill=\"#d9822b\" fill-opacity=\"0.8\">\n";
            for (long j = 0; j < f.shape[1]; ++j) {
                long i = 0;
                while (i < f.shape[0]) {
                    if (s.raster->state(f.index(i, j)) != geometry::CellState::VacantIsland) {
                        ++i;
                        continue;
                    }
                    long e = i;
                    while (e < f.shape[0] && s.raster->state(f.index(e, j)) == geometry::CellState::VacantIsland) ++e;
                    const double xa = f.origin[0] + i * f.h, ya = f.origin[1] + (j + 1) * f.h;
                    svg << "<rect x=\"" << X(xa) << "\" y=\"" << Y(ya) << "\" width=\"" << num((e - i) * f.h * scale)
                        << "\" height=\"" << num(f.h * scale) << "\"/>\n";
                    i = e;
                }
            }
            svg << "</g>\n";
        }
        if (s.field && s.channels && s.field->dim() == 2) {
            svg << "<g id=\"channels\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\">\n";
            for (const auto& ch : *s.channels) {
                svg << "<polyline points=\"";
                for (std::size_t k = 0; k < ch.size(); ++k) {
                    const Box c = s.field->cube(ch[k]);
                    svg << (k ? " " : "") << X(0.5 * (c.lo[0] + c.hi[0])) << "," << Y(0.5 * (c.lo[1] + c.hi[1]));
                }
                svg << "\"/>\n";
            }
            svg << "</g>\n";
        }
        svg << "</g>\n";
        svg << "<rect id=\"frame\" x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(sx * scale)
            << "\" height=\"" << num(sy * scale) << "\" fill=\"none\" stroke=\"black\"/>\n";
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace perfhom::io
